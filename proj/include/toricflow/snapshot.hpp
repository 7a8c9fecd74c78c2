#pragma once

#include <array>
#include <string>
#include <vector>

#include "toricflow/grid.hpp"

namespace toricflow {

struct Snapshot {
    int version = 1;
    std::string preset;
    std::string weights = "default";  // selector or comma-separated table
    int N = 0;
    double L = 0;
    double t = 0;
    double gauge_constant = 0;
    std::array<double, 2> drift{0.0, 0.0};
    Field phi;  // row-major, i along x1
};

void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);
std::string format_double(double v);

}  // namespace toricflow
