#pragma once

#include <string>
#include <vector>

namespace toricflow {

// Flat `key = value` run configuration; `#` starts a comment.
//
//   preset          cp2 | p1xp1 | bl1 | bl2 | bl3          (required)
//   weights         default | round | w1,w2,... per lattice point   [default]
//   N               even integer >= 32                     [96]
//   L               box half width in [8, 20]              [12]
//   sigma           time step safety factor in (0, 0.5]    [0.2]
//   t_end           final time > 0                         [5]
//   snapshot_every  row interval in (0, t_end]             [min(0.5, t_end)]
//   output          output directory                       [out]
//   lambda1         on | off, first eigenvalue on every row [off]
//   legendre        on | off, Legendre oracle at t = 0 and t_end [off]
//   initial         zero | file | bump                     [zero]
//   initial_file    snapshot path when initial = file
//   bump_amplitude  phi = A exp(-|x|^2 / w^2)              [0.1]
//   bump_width                                             [2]
struct RunConfig {
    std::string preset;
    std::string weights = "default";
    int N = 96;
    double L = 12.0;
    double sigma = 0.2;
    double t_end = 5.0;
    double snapshot_every = 0.5;
    std::string output = "out";
    bool lambda1 = false;
    bool legendre = false;
    std::string initial = "zero";
    std::string initial_file;
    double bump_amplitude = 0.1;
    double bump_width = 2.0;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& c);
void validate(const RunConfig& c);

// Weight vector for the configured selector or explicit table.
std::vector<double> config_weights(const RunConfig& c);

}  // namespace toricflow
