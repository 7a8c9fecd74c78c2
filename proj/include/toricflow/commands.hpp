#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "toricflow/config.hpp"

namespace toricflow {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitNumeric = 3,
    kExitBlowup = 4,
};

// Output directory layout:
//   config.txt        normalized configuration
//   diagnostics.csv   one row per snapshot interval
//   snapshots/        snap_<row>.txt per row
//   plot/             <column>.dat, two columns (t, value)
//   certificate.json  endpoint verdict (completed runs)
//   blowup.json       blow-up event and rescaled snapshot (aborted runs)
int command_run(const std::string& config_path, std::ostream& out, std::ostream& err);
int command_run(const RunConfig& c, std::ostream& out, std::ostream& err);

std::string command_report(const std::string& dir);

int command_presets(std::ostream& out);
int command_eh_reference(std::ostream& out, double a = 1.0,
                         const std::vector<double>& radii = {2, 5, 10, 30, 100, 300, 1000});
int command_lattice_search(const std::string& preset, long bound, std::ostream& out, std::ostream& err);

// Path of the shipped preset catalog.
std::string catalog_path();

}  // namespace toricflow
