#include "toricflow/soliton.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "toricflow/diagnostics.hpp"
#include "toricflow/errors.hpp"

namespace toricflow {

double soliton_residual(const MetricState& s, const RicciPotential& h) {
    // The Hessian (2,0) part annihilates span{1, F_1, F_2} exactly, so only the remainder
    // e = h - fit is differenced.
    const SpanProjection fit = project_on_holomorphy(s, h.h);
    const std::size_t n = s.grid().size();
    Field e = Field::Zero(n);
    for (std::size_t k = 0; k < n; ++k)
        if (s.valid[k]) e[k] = h.h[k] - fit.coef[0] - fit.coef[1] * s.dF[0][k] - fit.coef[2] * s.dF[1][k];
    const auto& fd = s.disc->fd();
    const Field e1 = fd.diff(e, 1, 0), e2 = fd.diff(e, 0, 1);
    const Field e11 = fd.diff(e, 2, 0), e12 = fd.diff(e, 1, 1), e22 = fd.diff(e, 0, 2);
    const auto& T = s.trusted();
    double sup = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!T[k] || !s.valid[k]) continue;
        // Gamma^l_{jk} = F^{lc} F_{cjk} = gamma[4k + 2l + j].
        const double d[2] = {e1[k], e2[k]};
        const double dd[3] = {e11[k], e12[k], e22[k]};
        double t[3];
        const int jk[3][2] = {{0, 0}, {0, 1}, {1, 1}};
        for (int q = 0; q < 3; ++q) {
            const int j = jk[q][0], kk = jk[q][1];
            double v = dd[q];
            for (int l = 0; l < 2; ++l) v -= s.gamma[4 * kk + 2 * l + j][k] * d[l];
            t[q] = v;
        }
        sup = std::max(sup, tensor_norm(s, k, t[0], t[1], t[2]));
    }
    return sup;
}

double normalized_soliton_residual(const MetricState& s, const RicciPotential& h) {
    double ric = 0;
    const auto& T = s.trusted();
    for (std::size_t k = 0; k < s.grid().size(); ++k)
        if (T[k]) ric = std::max(ric, std::sqrt(std::max(s.ric2[k], 0.0)));
    if (!(ric > 0)) return soliton_residual(s, h);
    return soliton_residual(s, h) / ric;
}

std::array<double, 2> futaki(const MetricState& s, const RicciPotential& h) {
    const double V = volume(s);
    return {integrate(s, h.dh[0]) / V, integrate(s, h.dh[1]) / V};
}

SpanProjection project_on_holomorphy(const MetricState& s, const Field& h) {
    const auto& T = s.trusted();
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < s.grid().size(); ++k) {
        if (!T[k]) continue;
        const Eigen::Vector3d B(1.0, s.dF[0][k], s.dF[1][k]);
        M.noalias() += s.det[k] * B * B.transpose();
        b += s.det[k] * h[k] * B;
    }
    const Eigen::Vector3d c = M.ldlt().solve(b);
    SpanProjection out;
    out.coef = {c[0], c[1], c[2]};
    for (std::size_t k = 0; k < s.grid().size(); ++k)
        if (T[k])
            out.residual = std::max(out.residual,
                                    std::abs(h[k] - c[0] - c[1] * s.dF[0][k] - c[2] * s.dF[1][k]));
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::KE: return "KE";
        case Verdict::KRS: return "KRS";
        default: return "undecided";
    }
}

SolitonCertificate certify_endpoint(const MetricState& s, const RicciPotential& h, CertificateTolerances tol) {
    SolitonCertificate c;
    if (const auto* p = s.disc->preset()) c.preset = p->name;
    c.N = s.grid().N;
    c.L = s.grid().L;
    c.tol = tol;
    c.residual_raw = soliton_residual(s, h);
    c.residual = normalized_soliton_residual(s, h);
    c.futaki = futaki(s, h);
    c.projection = project_on_holomorphy(s, h.h);
    const double fut = std::hypot(c.futaki[0], c.futaki[1]);
    if (c.residual <= tol.residual && c.projection.residual <= tol.residual)
        c.verdict = fut <= tol.futaki ? Verdict::KE : Verdict::KRS;
    return c;
}

nlohmann::json certificate_json(const SolitonCertificate& c) {
    nlohmann::json j;
    j["preset"] = c.preset;
    j["t"] = c.t;
    j["verdict"] = to_string(c.verdict);
    j["soliton_residual"] = c.residual;
    j["soliton_residual_raw"] = c.residual_raw;
    j["soliton_residual_initial"] = c.residual_initial;
    j["soliton_residual_ratio"] = c.residual_initial > 0 ? c.residual / c.residual_initial : 0.0;
    j["futaki"] = {c.futaki[0], c.futaki[1]};
    j["projection"] = {{"coefficients", {c.projection.coef[0], c.projection.coef[1], c.projection.coef[2]}},
                       {"residual", c.projection.residual}};
    j["tolerances"] = {{"residual", c.tol.residual}, {"futaki", c.tol.futaki}};
    j["grid"] = {{"N", c.N}, {"L", c.L}};
    return j;
}

BlowupEvent rescale_at_peak(const MetricState& s, const PotentialField& p, double Q, std::size_t node, double t) {
    if (!(Q > 0) || !std::isfinite(Q)) throw DomainError("rescaling needs a positive curvature peak (flat state?)");
    const Discretization& D = *s.disc;
    MaskOptions opts = D.mask_options();
    opts.resolved_tau *= Q;
    opts.trusted_tau *= Q;
    opts.ricci_tau *= Q;
    auto ref = std::make_shared<ScaledReference>(D.reference_ptr(), Q);
    auto disc = std::make_shared<Discretization>(D.grid(), ref, opts, D.preset());
    BlowupEvent e;
    e.t = t;
    e.node = node;
    const Grid& G = D.grid();
    e.x = {G.x(static_cast<int>(node / G.n())), G.x(static_cast<int>(node % G.n()))};
    e.Q = Q;
    e.rescaled = p;
    e.rescaled.disc = disc;
    e.rescaled.phi = p.phi * Q;
    e.rescaled.gauge_constant = p.gauge_constant * Q;
    const MetricState r = assemble(e.rescaled);
    e.rm_at_peak = std::sqrt(std::max(r.rm2[node], 0.0));
    e.energy_before = curvature_energy(s).rm;
    e.energy_after = curvature_energy(r).rm;
    return e;
}

nlohmann::json blowup_json(const BlowupEvent& e) {
    return {{"t", e.t},
            {"node", e.node},
            {"x", {e.x[0], e.x[1]}},
            {"Q", e.Q},
            {"rescaled_rm_at_peak", e.rm_at_peak},
            {"rm_energy_before", e.energy_before},
            {"rm_energy_after", e.energy_after}};
}

ObstructionVerdict divisor_obstruction(const std::vector<double>& cycles, double Q, bool toric, double tol) {
    ObstructionVerdict v;
    if (cycles.empty()) {
        v.verdict = "admissible";
        v.warning = true;
        v.explanation = "no compact cycles supplied; admissible by default";
        return v;
    }
    const bool all_zero = std::all_of(cycles.begin(), cycles.end(), [&](double c) { return std::abs(c) <= tol; });
    if (!all_zero) {
        v.verdict = "excluded";
        v.explanation =
            "a compact cycle has nonzero area; along the rescaled sequence its area is Q*a with a integer, "
            "which forces a = 0 as Q grows (Q = " + std::to_string(Q) + ")";
        return v;
    }
    if (toric) {
        v.verdict = "impossible";
        v.explanation =
            "a toric bubble contains a compact holomorphic sphere, while an admissible deepest bubble has none";
        return v;
    }
    v.verdict = "admissible";
    v.explanation = "all supplied cycles have zero area";
    return v;
}

}  // namespace toricflow
