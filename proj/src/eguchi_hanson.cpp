#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "toricflow/diagnostics.hpp"
#include "toricflow/errors.hpp"
#include "toricflow/soliton.hpp"

namespace toricflow {

namespace {

// Kahler potential Phi(s), s = |w|^2, with det g = 1 in the coordinates w.
struct EH {
    double a4;
    double q(double s) const { return std::sqrt(s * s + a4); }
    double phi(double s) const {
        const double a2 = std::sqrt(a4);
        return q(s) + a2 * std::log(s / (a2 + q(s)));
    }
    double d1(double s) const { return q(s) / s; }

    // In u = log s: A = s Phi', B = dA/du, beta = (dB/du) / B and its u-derivative.
    // psi = log Phi' + log (s Phi')' has psi_u = B/A + beta - 2, psi_uu = (B/A)(beta - B/A) + beta'.
    double ric_norm(double s) const {
        const double Q = q(s), A = Q, B = s * s / Q;
        const double beta = 1 + a4 / (Q * Q), dbeta = -2 * a4 * s * s / (Q * Q * Q * Q);
        const double psi_u = B / A + beta - 2;
        const double psi_uu = (B / A) * (beta - B / A) + dbeta;
        const double tang = psi_u / A;
        const double rad = psi_uu / B;
        return std::sqrt(tang * tang + rad * rad);
    }
};

}  // namespace

EHReport eguchi_hanson_reference(double a, const std::vector<double>& radii, int N, double L) {
    if (!(a > 0)) throw DomainError("core scale a must be positive");
    for (double r : radii)
        if (!(r > a)) throw DomainError("sample radii must exceed the core scale a");
    const EH eh{a * a * a * a};
    EHReport rep;
    rep.a = a;

    for (int k = -400; k <= 400; ++k) {
        const double s = a * a * std::pow(10.0, k / 100.0);
        rep.ric_analytic = std::max(rep.ric_analytic, eh.ric_norm(s));
    }

    // Toric form F(x) = Phi(e^x1 + e^x2) through the grid pipeline.
    Grid G(N, L);
    auto ref = std::make_shared<QuadraticReference>(1.0);
    auto disc = std::make_shared<Discretization>(G, ref);
    PotentialField p = PotentialField::zero(disc, "eguchi-hanson");
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) {
            const double x1 = G.x(i), x2 = G.x(j);
            p.phi[G.idx(i, j)] = eh.phi(std::exp(x1) + std::exp(x2)) - 0.5 * (x1 * x1 + x2 * x2);
        }
    const MetricState s = assemble(p);
    for (std::size_t k = 0; k < G.size(); ++k)
        if (s.trusted()[k]) rep.ric_fd = std::max(rep.ric_fd, std::sqrt(std::max(s.ric2[k], 0.0)));
    rep.rm_energy = curvature_energy(s).rm;

    // Geodesic distance from the core: d rho = ds / sqrt(2 q(s)); with s = a^2 sinh t
    // the integrand is (a / sqrt 2) sqrt(cosh t).
    auto rho = [&](double sv) {
        const double T = std::asinh(sv / (a * a));
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double t) { return a / std::sqrt(2.0) * std::sqrt(std::cosh(t)); }, 0.0, T, 15, 1e-13);
    };
    for (double r : radii) {
        double hi = a * a;
        while (rho(hi) < r) hi *= 2;
        boost::uintmax_t iters = 200;
        const auto br = boost::math::tools::toms748_solve(
            [&](double sv) { return rho(sv) - r; }, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), iters);
        const double sv = 0.5 * (br.first + br.second);
        // dV = 2 pi^2 s ds on the Z_2 quotient.
        rep.radii.push_back(r);
        rep.volume_ratio.push_back(M_PI * M_PI * sv * sv / std::pow(r, 4));
    }

    // omega restricted to the core is a^2 i ddbar log(1 + |z|^2).
    boost::math::quadrature::exp_sinh<double> integrator;
    const double radial = integrator.integrate([](double r) { return 2 * r / ((1 + r * r) * (1 + r * r)); });
    rep.core_area = 2 * M_PI * a * a * radial;

    // Moment image of the core: the segment between the limits of grad F as s -> 0.
    auto grad = [&](double x1, double x2) {
        const double sv = std::exp(x1) + std::exp(x2);
        return std::array<double, 2>{eh.d1(sv) * std::exp(x1), eh.d1(sv) * std::exp(x2)};
    };
    const double far = 40, deep = -80;
    const auto ya = grad(deep + far, deep - far), yb = grad(deep - far, deep + far);
    rep.core_area_moment = 2 * M_PI * std::max(std::abs(ya[0] - yb[0]), std::abs(ya[1] - yb[1]));
    return rep;
}

nlohmann::json eh_json(const EHReport& r) {
    nlohmann::json j;
    j["a"] = r.a;
    j["max_ric_analytic"] = r.ric_analytic;
    j["max_ric_grid"] = r.ric_fd;
    j["rm_energy_box"] = r.rm_energy;
    j["radii"] = r.radii;
    j["volume_ratio"] = r.volume_ratio;
    j["volume_ratio_limit"] = M_PI * M_PI / 4;
    j["core_area"] = r.core_area;
    j["core_area_moment"] = r.core_area_moment;
    const auto v = divisor_obstruction({r.core_area}, 1.0);
    j["obstruction"] = {{"verdict", v.verdict}, {"explanation", v.explanation}};
    return j;
}

}  // namespace toricflow
