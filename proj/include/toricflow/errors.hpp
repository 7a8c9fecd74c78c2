#pragma once

#include <stdexcept>
#include <string>

namespace toricflow {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Hessian of F failed to be positive definite at grid node (i, j).
class DegenerateMetricError : public NumericError {
public:
    DegenerateMetricError(int i, int j, double x1, double x2)
        : NumericError("degenerate metric at node (" + std::to_string(i) + ", " +
                       std::to_string(j) + "), x = (" + std::to_string(x1) + ", " +
                       std::to_string(x2) + ")"),
          i(i), j(j), x1(x1), x2(x2) {}
    int i, j;
    double x1, x2;
};

class BlowupSuspected : public std::runtime_error {
public:
    BlowupSuspected(double t, int i, int j, double peak)
        : std::runtime_error("blow-up suspected at t = " + std::to_string(t) +
                             ", node (" + std::to_string(i) + ", " + std::to_string(j) +
                             "), sup|Rm| = " + std::to_string(peak)),
          t(t), i(i), j(j), peak(peak) {}
    double t;
    int i, j;
    double peak;
};

}  // namespace toricflow
