#include "toricflow/metric.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "toricflow/errors.hpp"

namespace toricflow {

namespace {

struct Sym2 {
    double a, b, c;  // [[a, b], [b, c]]
    double det() const { return a * c - b * b; }
    double lmin() const {
        const double m = 0.5 * (a + c), d = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        return m - d;
    }
    Sym2 inv() const {
        const double d = det();
        return {c / d, -b / d, a / d};
    }
    double operator()(int i, int j) const { return i + j == 0 ? a : (i + j == 1 ? b : c); }
};

// The 8 index permutations generated by i<->k, j<->l and (i<->j, k<->l).
const std::vector<std::array<int, 4>>& rm_group() {
    static const std::vector<std::array<int, 4>> group = [] {
        const std::array<std::array<int, 4>, 3> gens = {{{2, 1, 0, 3}, {0, 3, 2, 1}, {1, 0, 3, 2}}};
        std::set<std::array<int, 4>> seen = {{0, 1, 2, 3}};
        std::vector<std::array<int, 4>> todo = {{0, 1, 2, 3}};
        while (!todo.empty()) {
            auto p = todo.back();
            todo.pop_back();
            for (const auto& g : gens) {
                std::array<int, 4> q{p[g[0]], p[g[1]], p[g[2]], p[g[3]]};
                if (seen.insert(q).second) todo.push_back(q);
            }
        }
        return std::vector<std::array<int, 4>>(seen.begin(), seen.end());
    }();
    return group;
}

bool in_margin(const Grid& g, int i, int j, int m) {
    return i >= m && j >= m && i <= g.N - m && j <= g.N - m;
}

}  // namespace

Discretization::Discretization(Grid g, std::shared_ptr<const Reference> ref, MaskOptions opts,
                               const FanoPreset* preset)
    : grid_(g), fd_(g), ref_(std::move(ref)), preset_(preset), opts_(opts) {
    const std::size_t n = grid_.size();
    jets_.resize(n);
    lmin0_.resize(n);
    logdet0_.resize(n);
    gamma0_.resize(n);
    dgamma0_.resize(n);
    for (auto& f : ric0_) f = Field::Zero(n);
    resolved_.assign(n, 0);
    trusted_.assign(n, 0);
    ricci_.assign(n, 0);
    for (int i = 0; i < grid_.n(); ++i)
        for (int j = 0; j < grid_.n(); ++j) {
            const std::size_t k = grid_.idx(i, j);
            const Jet jt = ref_->jet(grid_.x(i), grid_.x(j));
            jets_[k] = jt;
            const Sym2 m{jt.d2[0], jt.d2[1], jt.d2[2]};
            lmin0_[k] = m.lmin();
            logdet0_[k] = m.det() > 0 ? std::log(m.det()) : -INFINITY;
            if (m.det() <= 0) continue;
            const Sym2 mi = m.inv();
            auto& G = gamma0_[k];
            for (int kk = 0; kk < 2; ++kk)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        double s = 0;
                        for (int c = 0; c < 2; ++c) s += mi(a, c) * jt.third(c, b, kk);
                        G[4 * kk + 2 * a + b] = s;
                    }
            auto& D = dgamma0_[k];
            for (int l = 0; l < 2; ++l)
                for (int kk = 0; kk < 2; ++kk)
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            double s = 0;
                            for (int c = 0; c < 2; ++c)
                                s += mi(a, c) * jt.fourth(c, b, kk, l) -
                                     G[4 * l + 2 * a + c] * G[4 * kk + 2 * c + b];
                            D[8 * l + 4 * kk + 2 * a + b] = s;
                        }
            // (log det)_jk = sum_a d_j Gamma_k[a][a]
            ric0_[0][k] = -(D[0] + D[3]);
            ric0_[1][k] = -0.5 * (D[4] + D[7] + D[8] + D[11]);
            ric0_[2][k] = -(D[12] + D[15]);
            resolved_[k] = lmin0_[k] >= opts_.resolved_tau && in_margin(grid_, i, j, opts_.resolved_margin);
            trusted_[k] = lmin0_[k] >= opts_.trusted_tau && in_margin(grid_, i, j, opts_.trusted_margin);
        }
    for (int i = 0; i < grid_.n(); ++i)
        for (int j = 0; j < grid_.n(); ++j) {
            const std::size_t k = grid_.idx(i, j);
            if (lmin0_[k] < opts_.ricci_tau || !in_margin(grid_, i, j, std::max(opts_.ricci_margin, 2))) continue;
            bool ok = true;
            for (int di = -2; di <= 2 && ok; ++di)
                for (int dj = -2; dj <= 2 && ok; ++dj) ok = resolved_[grid_.idx(i + di, j + dj)];
            ricci_[k] = ok;
        }
}

std::shared_ptr<const Discretization> Discretization::for_preset(const FanoPreset& p,
                                                                 const std::vector<double>& weights,
                                                                 Grid g, MaskOptions opts) {
    auto ref = std::make_shared<ToricReference>(p.polytope, weights);
    return std::make_shared<Discretization>(g, ref, opts, &p);
}

std::size_t Discretization::trusted_count() const {
    return static_cast<std::size_t>(std::count(trusted_.begin(), trusted_.end(), 1));
}

PotentialField PotentialField::zero(std::shared_ptr<const Discretization> d, std::string preset,
                                    std::vector<double> weights) {
    PotentialField p;
    p.phi = Field::Zero(d->grid().size());
    p.disc = std::move(d);
    p.preset_name = std::move(preset);
    p.weights = std::move(weights);
    return p;
}

MetricState assemble(const PotentialField& p, const Mask* checked) {
    const Discretization& D = *p.disc;
    const Grid& G = D.grid();
    const FiniteDifference& fd = D.fd();
    const std::size_t n = G.size();
    if (static_cast<std::size_t>(p.phi.size()) != n) throw DomainError("potential size mismatch");
    if (!p.phi.allFinite()) throw NumericError("non-finite potential values");
    const Mask& chk = checked ? *checked : D.resolved();

    MetricState s;
    s.disc = p.disc;
    const Field p1 = fd.diff(p.phi, 1, 0), p2 = fd.diff(p.phi, 0, 1);
    const Field p11 = fd.diff(p.phi, 2, 0), p12 = fd.diff(p.phi, 1, 1), p22 = fd.diff(p.phi, 0, 2);
    const std::array<Field, 4> p3 = {fd.diff(p.phi, 3, 0), fd.diff(p.phi, 2, 1), fd.diff(p.phi, 1, 2),
                                     fd.diff(p.phi, 0, 3)};
    s.F.resize(n);
    for (auto& f : s.dF) f.resize(n);
    for (auto& f : s.g) f.resize(n);
    for (auto& f : s.ginv) f.resize(n);
    for (auto& f : s.d3F) f.resize(n);
    for (auto& f : s.gamma) f.resize(n);
    s.det.resize(n);
    s.logdet.resize(n);
    s.valid.assign(n, 0);
    std::array<Field, 8> dgam;
    for (auto& f : dgam) f = Field::Zero(n);

    for (int i = 0; i < G.n(); ++i)
        for (int j = 0; j < G.n(); ++j) {
            const std::size_t k = G.idx(i, j);
            const Jet& jt = D.jets()[k];
            s.F[k] = jt.f + p.phi[k];
            const bool res = D.resolved()[k];
            s.dF[0][k] = jt.d1[0] + (res ? p1[k] : 0.0);
            s.dF[1][k] = jt.d1[1] + (res ? p2[k] : 0.0);
            Sym2 m{jt.d2[0] + p11[k], jt.d2[1] + p12[k], jt.d2[2] + p22[k]};
            if (chk[k] && !(m.det() > 0 && m.a > 0 && std::isfinite(m.det())))
                throw DegenerateMetricError(i, j, G.x(i), G.x(j));
            // Below the resolution of the grid the reference metric is used.
            if (!res) m = Sym2{jt.d2[0], jt.d2[1], jt.d2[2]};
            s.g[0][k] = m.a;
            s.g[1][k] = m.b;
            s.g[2][k] = m.c;
            for (int q = 0; q < 4; ++q) s.d3F[q][k] = jt.d3[q] + (res ? p3[q][k] : 0.0);
            const double det = m.det();
            s.det[k] = det;
            const bool ok = det > 0 && m.a > 0 && std::isfinite(det);
            if (!ok) {
                s.logdet[k] = -INFINITY;
                for (auto& f : s.ginv) f[k] = 0;
                for (auto& f : s.gamma) f[k] = 0;
                continue;
            }
            s.valid[k] = 1;
            s.logdet[k] = std::log(det);
            const Sym2 mi = m.inv();
            s.ginv[0][k] = mi.a;
            s.ginv[1][k] = mi.b;
            s.ginv[2][k] = mi.c;
            for (int kk = 0; kk < 2; ++kk)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        double v = 0;
                        for (int c = 0; c < 2; ++c) v += mi(a, c) * s.d3F[c + b + kk][k];
                        const int q = 4 * kk + 2 * a + b;
                        s.gamma[q][k] = res ? v : D.gamma0()[k][q];
                        dgam[q][k] = res ? v - D.gamma0()[k][q] : 0.0;
                    }
        }

    // d_l Gamma_k = analytic reference part + finite differences of the correction.
    std::array<std::array<Field, 8>, 2> ddg;
    for (int q = 0; q < 8; ++q) {
        ddg[0][q] = fd.diff(dgam[q], 1, 0);
        ddg[1][q] = fd.diff(dgam[q], 0, 1);
    }

    // Ric = Ric0 - D^2 (log det F - log det F0) on the Ricci set.
    Field ld = Field::Zero(n);
    for (std::size_t k = 0; k < n; ++k)
        if (D.resolved()[k] && s.valid[k]) ld[k] = s.logdet[k] - D.logdet0()[k];
    const std::array<Field, 3> dld = {fd.diff(ld, 2, 0), fd.diff(ld, 1, 1), fd.diff(ld, 0, 2)};

    s.rm.assign(n, {});
    for (auto& f : s.ric) f = Field::Zero(n);
    s.R = Field::Zero(n);
    s.rm2 = Field::Zero(n);
    s.ric2 = Field::Zero(n);
    const auto& group = rm_group();
    for (std::size_t k = 0; k < n; ++k) {
        if (!s.valid[k]) continue;
        // Curvature off the trusted set is that of the reference metric.
        const bool tr = D.trusted()[k];
        const Jet& jt = D.jets()[k];
        double dG[16];
        for (int l = 0; l < 2; ++l)
            for (int q = 0; q < 8; ++q) dG[8 * l + q] = D.dgamma0()[k][8 * l + q] + (tr ? ddg[l][q][k] : 0.0);
        const Sym2 m = tr ? Sym2{s.g[0][k], s.g[1][k], s.g[2][k]} : Sym2{jt.d2[0], jt.d2[1], jt.d2[2]};
        const Sym2 mi = m.inv();
        // R_{ijkl} = -(M d_k Gamma_l)_{ij}
        double raw[16];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) {
                        double v = 0;
                        for (int e = 0; e < 2; ++e) v += m(a, e) * dG[8 * c + 4 * d + 2 * e + b];
                        raw[8 * a + 4 * b + 2 * c + d] = -v;
                    }
        auto& rm = s.rm[k];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) {
                        const std::array<int, 4> t{a, b, c, d};
                        double v = 0;
                        for (const auto& g : group) v += raw[8 * t[g[0]] + 4 * t[g[1]] + 2 * t[g[2]] + t[g[3]]];
                        rm[8 * a + 4 * b + 2 * c + d] = v / static_cast<double>(group.size());
                    }
        const bool rs = D.ricci_set()[k];
        for (int q = 0; q < 3; ++q) s.ric[q][k] = D.ric0()[q][k] - (rs ? dld[q][k] : 0.0);
        const Sym2 rc{s.ric[0][k], s.ric[1][k], s.ric[2][k]};
        const Sym2 ri = rs ? Sym2{s.ginv[0][k], s.ginv[1][k], s.ginv[2][k]} : Sym2{jt.d2[0], jt.d2[1], jt.d2[2]}.inv();
        double R = 0, r2 = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) R += ri(a, b) * rc(a, b);
        // |Ric|^2 = tr(g^-1 Ric g^-1 Ric)
        double A[2][2];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) A[a][b] = ri(a, 0) * rc(0, b) + ri(a, 1) * rc(1, b);
        r2 = A[0][0] * A[0][0] + A[0][1] * A[1][0] + A[1][0] * A[0][1] + A[1][1] * A[1][1];
        s.R[k] = R;
        s.ric2[k] = r2;
        // |Rm|^2 with all four indices raised.
        double up[16];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) {
                        double v = 0;
                        for (int e = 0; e < 2; ++e)
                            for (int f = 0; f < 2; ++f)
                                for (int g2 = 0; g2 < 2; ++g2)
                                    for (int h = 0; h < 2; ++h)
                                        v += mi(a, e) * mi(b, f) * mi(c, g2) * mi(d, h) *
                                             rm[8 * e + 4 * f + 2 * g2 + h];
                        up[8 * a + 4 * b + 2 * c + d] = v;
                    }
        double q2 = 0;
        for (int t = 0; t < 16; ++t) q2 += up[t] * rm[t];
        s.rm2[k] = q2;
    }
    return s;
}

double integrate(const MetricState& s, const Field& field, const Mask* mask) {
    const double h = s.grid().h();
    double acc = 0;
    for (std::size_t k = 0; k < s.grid().size(); ++k) {
        if (mask && !(*mask)[k]) continue;
        if (!s.valid[k]) continue;
        acc += field[k] * s.det[k];
    }
    return 4.0 * M_PI * M_PI * h * h * acc;
}

double volume(const MetricState& s, const Mask* mask) {
    return integrate(s, Field::Ones(s.grid().size()), mask);
}

double tensor_norm(const MetricState& s, std::size_t k, double t11, double t12, double t22) {
    const Sym2 mi{s.ginv[0][k], s.ginv[1][k], s.ginv[2][k]};
    const Sym2 t{t11, t12, t22};
    double A[2][2];
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) A[a][b] = mi(a, 0) * t(0, b) + mi(a, 1) * t(1, b);
    const double v = A[0][0] * A[0][0] + 2 * A[0][1] * A[1][0] + A[1][1] * A[1][1];
    return std::sqrt(std::max(v, 0.0));
}

double covector_norm(const MetricState& s, std::size_t k, double v1, double v2) {
    const double q = s.ginv[0][k] * v1 * v1 + 2 * s.ginv[1][k] * v1 * v2 + s.ginv[2][k] * v2 * v2;
    return std::sqrt(std::max(q, 0.0));
}

namespace {

// Limit of grad phi at a vertex. Along a grid ray (step si, sj) from the center node into the
// vertex cone, grad phi = c + a e^{r1 m} + b e^{r2 m} + ..., with r the decay rates of the chart
// variables e^{<w, x>} for the primitive edge vectors w at the vertex. Returns c.
std::array<double, 2> vertex_gradient_limit(const MetricState& s, const Field& phi, const Polytope& P,
                                            std::size_t v) {
    const Grid& G = s.grid();
    const auto& V = P.vertices();
    std::vector<std::array<long, 2>> w;
    for (const auto& e : P.edges()) {
        if (e.from != static_cast<int>(v) && e.to != static_cast<int>(v)) continue;
        const auto& o = V[e.from == static_cast<int>(v) ? e.to : e.from];
        const long wx = o[0] - V[v][0], wy = o[1] - V[v][1];
        const long l = std::gcd(std::abs(wx), std::abs(wy));
        w.push_back({wx / l, wy / l});
    }
    // Most central short step: maximize the slowest decay per unit length.
    int si = 0, sj = 0;
    double best = 0;
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b) {
            if (std::gcd(std::abs(a), std::abs(b)) != 1) continue;
            double slow = std::numeric_limits<double>::infinity();
            for (const auto& u : w) slow = std::min(slow, -static_cast<double>(u[0] * a + u[1] * b));
            slow /= std::hypot(a, b);
            if (slow > best) {
                best = slow;
                si = a;
                sj = b;
            }
        }
    if (best <= 0) throw DomainError("vertex cone has no interior grid direction");
    std::vector<double> rates;
    for (const auto& u : w) rates.push_back(G.h() * static_cast<double>(u[0] * si + u[1] * sj));
    std::vector<double> cand = rates;
    for (double a : rates)
        for (double b : rates) cand.push_back(a + b);
    std::sort(cand.begin(), cand.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double r1 = cand.front();
    double r2 = 2 * r1;
    for (double r : cand)
        if (std::abs(r) > 1.1 * std::abs(r1)) {
            r2 = r;
            break;
        }
    const int c0 = G.N / 2;
    int m_max = 0;
    for (int m = 1;; ++m) {
        const int i = c0 + m * si, j = c0 + m * sj;
        if (i < 0 || j < 0 || i > G.N || j > G.N || !s.disc->resolved()[G.idx(i, j)]) break;
        m_max = m;
    }
    auto grad = [&](int m) {
        const int i = c0 + m * si, j = c0 + m * sj;
        return std::array<double, 2>{s.disc->fd().diff_at(phi, 1, 0, i, j), s.disc->fd().diff_at(phi, 0, 1, i, j)};
    };
    if (m_max < 2) return grad(std::max(m_max, 0));
    const int q = std::clamp(static_cast<int>(std::lround(1.0 / std::abs(r1))), 1, m_max / 2);
    Eigen::Matrix3d A;
    Eigen::Matrix<double, 3, 2> b;
    for (int k = 0; k < 3; ++k) {
        const int m = m_max - k * q;
        const double dm = m - m_max;
        A(k, 0) = 1;
        A(k, 1) = std::exp(r1 * dm);
        A(k, 2) = std::exp(r2 * dm);
        const auto gm = grad(m);
        b(k, 0) = gm[0];
        b(k, 1) = gm[1];
    }
    const Eigen::Matrix<double, 3, 2> x = A.partialPivLu().solve(b);
    return {x(0, 0), x(0, 1)};
}

}  // namespace

std::vector<double> divisor_areas(const MetricState& s) {
    const FanoPreset* p = s.disc->preset();
    if (!p) throw DomainError("divisor areas need a preset discretization");
    const Grid& G = s.grid();
    const auto& V = p->polytope.vertices();
    Field phi(G.size());
    for (std::size_t k = 0; k < G.size(); ++k) phi[k] = s.F[k] - s.disc->jets()[k].f;
    std::vector<std::array<double, 2>> lim(V.size());
    for (std::size_t v = 0; v < V.size(); ++v) lim[v] = vertex_gradient_limit(s, phi, p->polytope, v);
    std::vector<double> out;
    for (const auto& e : p->polytope.edges()) {
        const double d0 = static_cast<double>(e.direction[0]), d1 = static_cast<double>(e.direction[1]);
        // grad F0 is taken at its limit, the vertex.
        const double g0 = V[e.to][0] - V[e.from][0] + lim[e.to][0] - lim[e.from][0];
        const double g1 = V[e.to][1] - V[e.from][1] + lim[e.to][1] - lim[e.from][1];
        out.push_back(2.0 * M_PI * (g0 * d0 + g1 * d1) / (d0 * d0 + d1 * d1));
    }
    return out;
}

}  // namespace toricflow
