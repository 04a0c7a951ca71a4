#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtlab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mtlab: variational diagnostics on discrete compact surfaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    int threads = 1;

    const std::pair<const char*, const char*> commands[] = {
        {"green", "solve one weighted Green function and fit its expansion"},
        {"robin-map", "map 2 log h + A_y over sample nodes"},
        {"minimize", "minimize the perturbed functional at one eps"},
        {"continuation", "warm-started minimization along an eps schedule"},
        {"sweep", "evaluate the concentrating family over an eps list"},
        {"mt-check", "ratio bound over random fields and the bubble family"},
        {"condition", "existence-condition margin at a point"},
        {"bubble-check", "bubble closed forms and PDE residual order"}};
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--set", overrides, "key.path=value override (repeatable)");
        sub->add_option("--threads", threads, "worker threads (default 1)");
        sub->add_option("--out", out_dir, "output directory");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    return mtlab::run_cli(config_path, command, overrides, out_dir, threads, std::cerr);
}
