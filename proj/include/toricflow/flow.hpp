#pragma once

#include <array>
#include <limits>
#include <memory>

#include "toricflow/farfield.hpp"
#include "toricflow/metric.hpp"

namespace toricflow {

// h = -log det F - F + kappa0 with derivatives; normalized by int (e^h - 1) dV = 0.
struct RicciPotential {
    Field h;
    std::array<Field, 2> dh;
    std::array<Field, 3> ddh;
    double kappa0 = 0;
    double normalization_residual = 0;  // |int (e^h - 1) dV| / V
    double sup_abs = 0;                 // sup |h| over the trusted set
};

RicciPotential ricci_potential(const MetricState& s);
// Wraps an arbitrary field; derivatives by finite differences, no normalization.
RicciPotential potential_from_field(const MetricState& s, const Field& h);

struct FlowRhs {
    Field phidot;
    double c = 0;  // (1/V) int phidot dV
};

// phidot = log(det(F0 + phi)_jk / det(F0)_jk) + phi - h0 on every valid node.
FlowRhs flow_rhs(const PotentialField& p, const Field& h0);

struct FlowOptions {
    double sigma = 0.2;
    double min_dt = 1e-10;
    double rm_jump = 1.5;  // reject when sup|Rm| grows by more than this factor
};

struct FlowState {
    PotentialField potential;
    double t = 0;
    double dt = 0;
    long step_index = 0;
    long rejected = 0;
    double c_of_t = 0;
    std::array<double, 2> velocity{0.0, 0.0};  // current soliton-gauge vector
    double sup_rm = 0;
    std::size_t sup_rm_node = 0;
};

// Linearly implicit two-stage Rosenbrock integrator for the potential flow,
// written in the gauge that removes the span{1, F_1, F_2} component of the speed.
class FlowSolver {
public:
    FlowSolver(std::shared_ptr<const Discretization> d, FlowOptions opts = {});
    ~FlowSolver();

    const Discretization& discretization() const { return *disc_; }
    const FarField& farfield() const { return *ff_; }
    const Field& h0() const { return h0_; }
    const FlowOptions& options() const { return opts_; }

    FlowState initial(PotentialField p) const;
    double suggested_dt(const MetricState& s) const;
    // One accepted step of size min(policy dt, limit); rejected attempts halve dt.
    // Returns the metric of the new state.
    MetricState step(FlowState& st, double limit = std::numeric_limits<double>::infinity());

    struct Projection {
        double c = 0;
        std::array<double, 2> v{0.0, 0.0};
        double raw_mean = 0;
    };
    // Gauge speed on the active nodes (constraint rows hold extrapolation residuals).
    Eigen::VectorXd gauge_speed(const Field& phi, Projection* proj = nullptr) const;

private:
    struct Impl;
    std::shared_ptr<const Discretization> disc_;
    FlowOptions opts_;
    std::unique_ptr<FarField> ff_;
    Field h0_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace toricflow
