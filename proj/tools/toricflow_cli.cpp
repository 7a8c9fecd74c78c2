#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toricflow/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Normalized Kahler-Ricci flow on toric Fano surfaces"};
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "integrate the flow for a configuration file");
    run->add_option("config", config, "key = value configuration file")->required();

    std::string dir;
    auto* report = app.add_subcommand("report", "summarize an output directory");
    report->add_option("dir", dir, "output directory of a run")->required();

    auto* presets = app.add_subcommand("presets", "print the preset catalog as JSON");

    double a = 1.0;
    std::vector<double> radii = {2, 5, 10, 30, 100, 300, 1000};
    auto* eh = app.add_subcommand("eh-reference", "Eguchi-Hanson reference report as JSON");
    eh->add_option("--a", a, "core scale");
    eh->add_option("--radii", radii, "geodesic radii from the core");

    std::string name;
    long bound = 0;
    auto* lattice = app.add_subcommand("lattice-search", "search for a class of self-intersection -2");
    lattice->add_option("preset", name, "preset name")->required();
    lattice->add_option("bound", bound, "sup-norm bound")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : toricflow::kExitUsage;
    }

    if (*run) return toricflow::command_run(config, std::cout, std::cerr);
    if (*report) {
        std::cout << toricflow::command_report(dir);
        return toricflow::kExitOk;
    }
    if (*presets) return toricflow::command_presets(std::cout);
    if (*eh) {
        try {
            return toricflow::command_eh_reference(std::cout, a, radii);
        } catch (const std::exception& e) {
            std::cerr << "configuration error: " << e.what() << '\n';
            return toricflow::kExitConfig;
        }
    }
    if (*lattice) return toricflow::command_lattice_search(name, bound, std::cout, std::cerr);
    return toricflow::kExitUsage;
}
