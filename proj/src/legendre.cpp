#include <algorithm>
#include <cmath>

#include "toricflow/errors.hpp"
#include "toricflow/metric.hpp"

namespace toricflow {

namespace {

// Tensor-product Lagrange interpolation on 6 x 6 nodes.
class Interpolator {
public:
    explicit Interpolator(const Grid& g) : g_(g) {}

    bool locate(double x1, double x2) {
        return setup(x1, i0_, wi_) && setup(x2, j0_, wj_);
    }
    double operator()(const Field& f) const {
        double acc = 0;
        for (int a = 0; a < 6; ++a) {
            double row = 0;
            for (int b = 0; b < 6; ++b) row += wj_[b] * f[g_.idx(i0_ + a, j0_ + b)];
            acc += wi_[a] * row;
        }
        return acc;
    }

private:
    bool setup(double x, int& i0, double* w) const {
        const double t = (x + g_.L) / g_.h();
        if (t < 0 || t > g_.N) return false;
        i0 = std::clamp(static_cast<int>(std::floor(t)) - 2, 0, g_.N - 5);
        for (int a = 0; a < 6; ++a) {
            double v = 1;
            for (int b = 0; b < 6; ++b)
                if (b != a) v *= (t - (i0 + b)) / static_cast<double>(a - b);
            w[a] = v;
        }
        return true;
    }

    const Grid& g_;
    int i0_ = 0, j0_ = 0;
    double wi_[6], wj_[6];
};

struct Corrections {
    Field f, d1, d2, h11, h12, h22;
};

// Grid potential minus the analytic reference, for interpolation off the nodes.
Corrections corrections(const MetricState& s) {
    const auto& jets = s.disc->jets();
    const std::size_t n = s.grid().size();
    Corrections c{Field(n), Field(n), Field(n), Field(n), Field(n), Field(n)};
    for (std::size_t k = 0; k < n; ++k) {
        c.f[k] = s.F[k] - jets[k].f;
        c.d1[k] = s.dF[0][k] - jets[k].d1[0];
        c.d2[k] = s.dF[1][k] - jets[k].d1[1];
        c.h11[k] = s.g[0][k] - jets[k].d2[0];
        c.h12[k] = s.g[1][k] - jets[k].d2[1];
        c.h22[k] = s.g[2][k] - jets[k].d2[2];
    }
    return c;
}

struct Local {
    double f, g1, g2, h11, h12, h22;
};

class Potential {
public:
    explicit Potential(const MetricState& s) : s_(s), ip_(s.grid()), c_(corrections(s)) {}

    bool eval(double x1, double x2, Local& out) {
        if (!ip_.locate(x1, x2)) return false;
        const Jet j = s_.disc->reference().jet(x1, x2);
        out.f = j.f + ip_(c_.f);
        out.g1 = j.d1[0] + ip_(c_.d1);
        out.g2 = j.d1[1] + ip_(c_.d2);
        out.h11 = j.d2[0] + ip_(c_.h11);
        out.h12 = j.d2[1] + ip_(c_.h12);
        out.h22 = j.d2[2] + ip_(c_.h22);
        return true;
    }
    double interpolate(double x1, double x2, const Field& f) {
        if (!ip_.locate(x1, x2)) throw NumericError("interpolation point outside the grid");
        return ip_(f);
    }

    // Solves grad F(x) = y by damped Newton.
    bool invert(double y1, double y2, double& x1, double& x2) {
        const double lim = s_.grid().L - 3 * s_.grid().h();
        Local p;
        if (!eval(x1, x2, p)) return false;
        for (int it = 0; it < 100; ++it) {
            const double r1 = p.g1 - y1, r2 = p.g2 - y2;
            if (std::hypot(r1, r2) < 1e-13) return true;
            const double det = p.h11 * p.h22 - p.h12 * p.h12;
            if (!(det > 0)) return false;
            const double d1 = -(p.h22 * r1 - p.h12 * r2) / det;
            const double d2 = -(-p.h12 * r1 + p.h11 * r2) / det;
            const double phi0 = p.f - x1 * y1 - x2 * y2;
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 40; ++ls) {
                const double n1 = x1 + step * d1, n2 = x2 + step * d2;
                Local q;
                if (std::abs(n1) < lim && std::abs(n2) < lim && eval(n1, n2, q) &&
                    q.f - n1 * y1 - n2 * y2 <= phi0 + 1e-14 * (1 + std::abs(phi0))) {
                    x1 = n1;
                    x2 = n2;
                    p = q;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) return std::hypot(r1, r2) < 1e-10;
        }
        return std::hypot(p.g1 - y1, p.g2 - y2) < 1e-10;
    }

private:
    const MetricState& s_;
    Interpolator ip_;
    Corrections c_;
};

}  // namespace

LegendreReport legendre_dual_check(const MetricState& s, double margin, int samples_per_axis) {
    const FanoPreset* pre = s.disc->preset();
    if (!pre) throw DomainError("Legendre check needs a preset discretization");
    const auto& poly = pre->polytope;
    const Grid& G = s.grid();
    const int M = samples_per_axis > 0 ? samples_per_axis : G.N;
    double lo[2] = {1e9, 1e9}, hi[2] = {-1e9, -1e9};
    for (const auto& v : poly.vertices())
        for (int a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], static_cast<double>(v[a]));
            hi[a] = std::max(hi[a], static_cast<double>(v[a]));
        }
    const double hy = std::max(hi[0] - lo[0], hi[1] - lo[1]) / M;
    auto edge_distance = [&](double y1, double y2) {
        double d = 1e9;
        for (const auto& e : poly.edges()) {
            const double nn = std::hypot(static_cast<double>(e.normal[0]), static_cast<double>(e.normal[1]));
            d = std::min(d, (e.support - e.normal[0] * y1 - e.normal[1] * y2) / nn);
        }
        return d;
    };

    Potential pot(s);
    LegendreReport rep;
    // Stencil weights for 4th-order first and second derivatives.
    const double w1[5] = {1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12};
    const double w2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    const int ny = static_cast<int>(std::ceil((hi[1] - lo[1]) / hy));
    const int nx = static_cast<int>(std::ceil((hi[0] - lo[0]) / hy));
    double xg1 = 0, xg2 = 0;
    for (int a = 0; a <= nx; ++a)
        for (int b = 0; b <= ny; ++b) {
            const double y1 = lo[0] + a * hy, y2 = lo[1] + b * hy;
            if (edge_distance(y1, y2) < margin + 2.9 * hy) continue;
            double u[5][5][3];
            for (int p = 0; p < 5; ++p)
                for (int q = 0; q < 5; ++q) {
                    double x1 = xg1, x2 = xg2;
                    const double z1 = y1 + (p - 2) * hy, z2 = y2 + (q - 2) * hy;
                    if (!pot.invert(z1, z2, x1, x2)) {
                        x1 = 0;
                        x2 = 0;
                        if (!pot.invert(z1, z2, x1, x2))
                            throw NumericError("Legendre inversion failed: oracle inconclusive");
                    }
                    if (p == 2 && q == 2) {
                        xg1 = x1;
                        xg2 = x2;
                    }
                    Local l;
                    pot.eval(x1, x2, l);
                    u[p][q][0] = l.h11;
                    u[p][q][1] = l.h12;
                    u[p][q][2] = l.h22;
                }
            double d11 = 0, d22 = 0, d12 = 0;
            for (int p = 0; p < 5; ++p) {
                d11 += w2[p] * u[p][2][0];
                d22 += w2[p] * u[2][p][2];
                for (int q = 0; q < 5; ++q) d12 += w1[p] * w1[q] * u[p][q][1];
            }
            const double R_dual = -(d11 + 2 * d12 + d22) / (hy * hy);
            const double R_grid = pot.interpolate(xg1, xg2, s.R);
            rep.max_mismatch = std::max(rep.max_mismatch, std::abs(R_dual - R_grid));
            ++rep.samples;
        }

    // grad u(grad F(x)) = x on trusted nodes.
    for (int i = 0; i <= G.N; ++i)
        for (int j = 0; j <= G.N; ++j) {
            const std::size_t k = G.idx(i, j);
            if (!s.trusted()[k]) continue;
            double x1 = G.x(i) * 0.9, x2 = G.x(j) * 0.9;
            if (!pot.invert(s.dF[0][k], s.dF[1][k], x1, x2))
                throw NumericError("Legendre inversion failed: oracle inconclusive");
            rep.max_gradient_error = std::max(rep.max_gradient_error, std::hypot(x1 - G.x(i), x2 - G.x(j)));
        }
    if (rep.samples == 0) throw NumericError("Legendre check has no admissible sample points");
    return rep;
}

}  // namespace toricflow
