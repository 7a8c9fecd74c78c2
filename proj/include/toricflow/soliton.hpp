#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "toricflow/flow.hpp"

namespace toricflow {

// sup over trusted nodes of |e_jk - Gamma^l_jk e_l|_g with e = h minus its projection onto
// span{1, F_1, F_2}; the projected part contributes nothing analytically.
double soliton_residual(const MetricState& s, const RicciPotential& h);

// (1/V) int h_k dV for the two torus generators.
std::array<double, 2> futaki(const MetricState& s, const RicciPotential& h);

// det F weighted least squares fit h ~ c0 + c1 F_1 + c2 F_2 on the trusted set.
struct SpanProjection {
    std::array<double, 3> coef{0.0, 0.0, 0.0};
    double residual = 0;  // sup |h - fit| over the trusted set
};
SpanProjection project_on_holomorphy(const MetricState& s, const Field& h);

enum class Verdict { KE, KRS, Undecided };
std::string to_string(Verdict v);

struct CertificateTolerances {
    double residual = 1e-3;
    double futaki = 1e-3;
};

struct SolitonCertificate {
    std::string preset;
    double t = 0;
    double residual = 0;             // scale normalized: raw / sup|Ric|
    double residual_raw = 0;
    double residual_initial = 0;     // same normalization at t = 0, if known
    std::array<double, 2> futaki{0.0, 0.0};
    SpanProjection projection;
    Verdict verdict = Verdict::Undecided;
    CertificateTolerances tol;
    int N = 0;
    double L = 0;
};

double normalized_soliton_residual(const MetricState& s, const RicciPotential& h);

SolitonCertificate certify_endpoint(const MetricState& s, const RicciPotential& h,
                                    CertificateTolerances tol = {});
nlohmann::json certificate_json(const SolitonCertificate& c);

struct BlowupEvent {
    double t = 0;
    std::size_t node = 0;
    std::array<double, 2> x{0.0, 0.0};
    double Q = 0;
    PotentialField rescaled;   // potential of Q g
    double rm_at_peak = 0;     // |Rm| of the rescaled metric at the peak node
    double energy_before = 0;  // int |Rm|^2 dV
    double energy_after = 0;
};

// g -> Q g, i.e. F -> Q F; the masks are carried over unchanged.
BlowupEvent rescale_at_peak(const MetricState& s, const PotentialField& p, double Q,
                            std::size_t node, double t = 0);
nlohmann::json blowup_json(const BlowupEvent& e);

struct EHReport {
    double a = 1;
    double ric_analytic = 0;   // max |Ric|_g from the closed form
    double ric_fd = 0;         // max |Ric|_g through the grid pipeline
    double rm_energy = 0;      // int |Rm|^2 dV over the grid box
    std::vector<double> radii;
    std::vector<double> volume_ratio;  // Vol(tube of radius r about the core) / r^4
    double core_area = 0;              // int of omega over the core sphere, by quadrature
    double core_area_moment = 0;       // 2 pi times the length of the core edge of the moment image
};

// Eguchi-Hanson metric with core scale a; radii are geodesic distances from the core.
EHReport eguchi_hanson_reference(double a, const std::vector<double>& radii, int N = 96, double L = 2.0);
nlohmann::json eh_json(const EHReport& r);

struct ObstructionVerdict {
    std::string verdict;  // "admissible", "excluded" or "impossible"
    std::string explanation;
    bool warning = false;
};

// Deepest-bubble test: every compact 2-cycle of a deepest bubble must have zero area.
ObstructionVerdict divisor_obstruction(const std::vector<double>& cycle_integrals, double Q,
                                       bool toric = false, double tol = 1e-8);

}  // namespace toricflow
