#include <CLI11.hpp>

#include <iostream>

#include "tasqp/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tasqp - line-search SQP with tunable-accuracy models"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run_cmd = app.add_subcommand("run", "execute a configured solver run");
    run_cmd->add_option("config", config_path, "JSON run configuration")->required();

    std::string history_a, history_b;
    CLI::App* cmp_cmd = app.add_subcommand("compare", "compare two run histories");
    cmp_cmd->add_option("history_a", history_a, "first history file")->required();
    cmp_cmd->add_option("history_b", history_b, "second history file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        return tasqp::cli::run(config_path, std::cout, std::cerr);
    }
    return tasqp::cli::compare(history_a, history_b, std::cout, std::cerr);
}
