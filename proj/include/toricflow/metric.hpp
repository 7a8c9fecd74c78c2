#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "toricflow/grid.hpp"
#include "toricflow/polytope.hpp"
#include "toricflow/reference.hpp"

namespace toricflow {

using Mask = std::vector<std::uint8_t>;

struct MaskOptions {
    double resolved_tau = 1e-5;  // min eigenvalue of D^2 F0 on the PDE set
    int resolved_margin = 2;     // nodes kept away from the box edge
    double trusted_tau = 1e-2;   // min eigenvalue of D^2 F0 on the diagnostic set
    int trusted_margin = 4;
    double ricci_tau = 1e-4;     // min eigenvalue of D^2 F0 where Ric = -(log det)_jk is resolved
    int ricci_margin = 4;
};

// Grid, reference potential and everything about them that does not depend on phi.
class Discretization {
public:
    Discretization(Grid g, std::shared_ptr<const Reference> ref, MaskOptions opts = {},
                   const FanoPreset* preset = nullptr);

    static std::shared_ptr<const Discretization> for_preset(const FanoPreset& p,
                                                            const std::vector<double>& weights,
                                                            Grid g, MaskOptions opts = {});

    const Grid& grid() const { return grid_; }
    const FiniteDifference& fd() const { return fd_; }
    const Reference& reference() const { return *ref_; }
    std::shared_ptr<const Reference> reference_ptr() const { return ref_; }
    const FanoPreset* preset() const { return preset_; }
    const MaskOptions& mask_options() const { return opts_; }

    const std::vector<Jet>& jets() const { return jets_; }
    const Field& lambda_min0() const { return lmin0_; }
    const Field& logdet0() const { return logdet0_; }
    // Analytic Gamma0_k = (D^2 F0)^{-1} d_k D^2 F0, entries [k][a][b] flattened as 4k + 2a + b.
    const std::vector<std::array<double, 8>>& gamma0() const { return gamma0_; }
    // Analytic d_l Gamma0_k, flattened as 8l + 4k + 2a + b.
    const std::vector<std::array<double, 16>>& dgamma0() const { return dgamma0_; }

    // Analytic Ric0_jk = -(log det D^2 F0)_jk as (11, 12, 22).
    const std::array<Field, 3>& ric0() const { return ric0_; }

    const Mask& resolved() const { return resolved_; }
    const Mask& trusted() const { return trusted_; }
    // Resolved nodes whose 5x5 neighbourhood is resolved and lambda_min(F0) >= ricci_tau.
    const Mask& ricci_set() const { return ricci_; }
    std::size_t trusted_count() const;

private:
    Grid grid_;
    FiniteDifference fd_;
    std::shared_ptr<const Reference> ref_;
    const FanoPreset* preset_;
    MaskOptions opts_;
    std::vector<Jet> jets_;
    Field lmin0_, logdet0_;
    std::vector<std::array<double, 8>> gamma0_;
    std::vector<std::array<double, 16>> dgamma0_;
    std::array<Field, 3> ric0_;
    Mask resolved_, trusted_, ricci_;
};

struct PotentialField {
    std::shared_ptr<const Discretization> disc;
    std::string preset_name;
    std::vector<double> weights;
    Field phi;
    double gauge_constant = 0;
    std::array<double, 2> drift{0.0, 0.0};

    static PotentialField zero(std::shared_ptr<const Discretization> d, std::string preset = "",
                               std::vector<double> weights = {});
};

// Derived tensor fields on every node.  Off the resolved set the metric is the
// reference metric.  Ric_jk = -(log det F)_jk and R use the reference part analytically and
// finite differences of log det F - log det F0 on the Ricci set; Rm is computed on the trusted
// set.  Elsewhere each is the reference value.  Symmetric 2-tensors are stored as
// (11, 12, 22); Rm as R[i][j][k][l] = R_{i jbar k lbar} flattened 8i + 4j + 2k + l.
struct MetricState {
    std::shared_ptr<const Discretization> disc;
    Field F;
    std::array<Field, 2> dF;
    std::array<Field, 3> g, ginv;
    std::array<Field, 4> d3F;
    Field det, logdet;
    std::array<Field, 8> gamma;
    std::array<Field, 3> ric;
    Field R, rm2, ric2;
    std::vector<std::array<double, 16>> rm;
    Mask valid;  // Hessian positive definite

    const Grid& grid() const { return disc->grid(); }
    const Mask& trusted() const { return disc->trusted(); }
    double rm_at(std::size_t node, int i, int j, int k, int l) const {
        return rm[node][8 * i + 4 * j + 2 * k + l];
    }
};

// Assembles all fields; throws DegenerateMetricError if the Hessian fails to be
// positive definite on `checked` (default: the resolved set).
MetricState assemble(const PotentialField& p, const Mask* checked = nullptr);

// (2 pi)^2 sum field * det F * h^2 over the mask (all nodes when null).
double integrate(const MetricState& s, const Field& field, const Mask* mask = nullptr);
double volume(const MetricState& s, const Mask* mask = nullptr);

// Pointwise |T|_g for a symmetric 2-tensor (11, 12, 22).
double tensor_norm(const MetricState& s, std::size_t node, double t11, double t12, double t22);
// sqrt(F^{jk} v_j v_k).
double covector_norm(const MetricState& s, std::size_t node, double v1, double v2);

// Divisor areas per polytope edge: 2 pi times the lattice length of the edge displaced by
// the vertex limits of grad phi at its ends, extrapolated along grid rays into the vertex cones.
std::vector<double> divisor_areas(const MetricState& s);

// Base diameter (graph distance in the metric 1/2 F_jk dx dx) and fiber diameter
// (covering radius of 2 pi Z^2 under 2 F_jk), surrogate = max of the two.
struct DiameterReport {
    double base = 0;
    double fiber = 0;
    double surrogate = 0;
};
DiameterReport diameter_surrogate(const MetricState& s);

// Vol(B(center, r)) / r^4 with graph distance on the base and fibers integrated.
// Throws when the ball would contain the whole grid.
double ball_volume_ratio(const MetricState& s, std::size_t center, double r);

struct LegendreReport {
    double max_mismatch = 0;     // max |R_dual - R| over the sample
    double max_gradient_error = 0;  // max |grad u(grad F(x)) - x|
    std::size_t samples = 0;
};
LegendreReport legendre_dual_check(const MetricState& s, double margin = 0.15,
                                   int samples_per_axis = 0);

}  // namespace toricflow
