#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "toricflow/errors.hpp"
#include "toricflow/metric.hpp"

namespace toricflow {

namespace {

constexpr int kOffsets[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1}, {-1, 1}, {-1, -1},
                                 {1, 2},  {2, 1},  {-1, 2}, {-2, 1}, {1, -2}, {2, -1}, {-1, -2}, {-2, -1}};

// Length of the straight segment between nodes in the base metric 1/2 F_jk dx dx,
// with the metric averaged over the endpoints.
double edge_length(const MetricState& s, std::size_t a, std::size_t b, double dx, double dy) {
    const double g11 = 0.5 * (s.g[0][a] + s.g[0][b]);
    const double g12 = 0.5 * (s.g[1][a] + s.g[1][b]);
    const double g22 = 0.5 * (s.g[2][a] + s.g[2][b]);
    return std::sqrt(std::max(0.5 * (g11 * dx * dx + 2 * g12 * dx * dy + g22 * dy * dy), 0.0));
}

double quad_distance(const MetricState& s, std::size_t c, double dx, double dy) {
    return std::sqrt(std::max(
        0.5 * (s.g[0][c] * dx * dx + 2 * s.g[1][c] * dx * dy + s.g[2][c] * dy * dy), 0.0));
}

// Dijkstra over valid nodes; nodes within `seed_radius` cells of the source start at
// the distance of the source's quadratic form.
std::vector<double> distances(const MetricState& s, int ci, int cj, int seed_radius,
                              double cutoff = std::numeric_limits<double>::infinity()) {
    const Grid& G = s.grid();
    const double h = G.h();
    const std::size_t src = G.idx(ci, cj);
    std::vector<double> d(G.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (int di = -seed_radius; di <= seed_radius; ++di)
        for (int dj = -seed_radius; dj <= seed_radius; ++dj) {
            const int i = ci + di, j = cj + dj;
            if (i < 0 || j < 0 || i > G.N || j > G.N) continue;
            const std::size_t k = G.idx(i, j);
            if (!s.valid[k]) continue;
            d[k] = quad_distance(s, src, di * h, dj * h);
            pq.emplace(d[k], k);
        }
    while (!pq.empty()) {
        auto [du, u] = pq.top();
        pq.pop();
        if (du > d[u] || du > cutoff) continue;
        const int ui = static_cast<int>(u / G.n()), uj = static_cast<int>(u % G.n());
        for (const auto& o : kOffsets) {
            const int vi = ui + o[0], vj = uj + o[1];
            if (vi < 0 || vj < 0 || vi > G.N || vj > G.N) continue;
            const std::size_t v = G.idx(vi, vj);
            if (!s.valid[v]) continue;
            const double nd = du + edge_length(s, u, v, o[0] * h, o[1] * h);
            if (nd < d[v]) {
                d[v] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    return d;
}

// Covering radius of the lattice 2 pi Z^2 under the Gram matrix 2 F.
double fiber_covering_radius(double g11, double g12, double g22) {
    auto ip = [&](const double* u, const double* v) {
        return 2.0 * (g11 * u[0] * v[0] + g12 * (u[0] * v[1] + u[1] * v[0]) + g22 * u[1] * v[1]);
    };
    double b1[2] = {2 * M_PI, 0}, b2[2] = {0, 2 * M_PI};
    for (int it = 0; it < 64; ++it) {
        if (ip(b1, b1) > ip(b2, b2)) std::swap(b1, b2);
        const double mu = std::round(ip(b1, b2) / ip(b1, b1));
        if (mu == 0) break;
        b2[0] -= mu * b1[0];
        b2[1] -= mu * b1[1];
    }
    if (ip(b1, b2) < 0) {
        b2[0] = -b2[0];
        b2[1] = -b2[1];
    }
    const double d3[2] = {b1[0] - b2[0], b1[1] - b2[1]};
    const double a = std::sqrt(ip(b1, b1)), b = std::sqrt(ip(b2, b2)), c = std::sqrt(ip(d3, d3));
    const double area2 = ip(b1, b1) * ip(b2, b2) - ip(b1, b2) * ip(b1, b2);
    return a * b * c / (2.0 * std::sqrt(std::max(area2, 1e-300)));
}

}  // namespace

DiameterReport diameter_surrogate(const MetricState& s) {
    const Grid& G = s.grid();
    DiameterReport rep;
    for (std::size_t k = 0; k < G.size(); ++k)
        if (s.valid[k])
            rep.fiber = std::max(rep.fiber, fiber_covering_radius(s.g[0][k], s.g[1][k], s.g[2][k]));
    // Eccentricities from the box corners, edge midpoints and center.
    const int m = G.N / 2;
    const int src[9][2] = {{0, 0}, {G.N, 0}, {0, G.N}, {G.N, G.N}, {m, 0}, {0, m}, {G.N, m}, {m, G.N}, {m, m}};
    bool any = false;
    for (const auto& c : src) {
        if (!s.valid[G.idx(c[0], c[1])]) continue;
        any = true;
        const auto d = distances(s, c[0], c[1], 0);
        for (std::size_t k = 0; k < G.size(); ++k)
            if (s.valid[k] && std::isfinite(d[k])) rep.base = std::max(rep.base, d[k]);
    }
    if (!any) throw NumericError("no valid source node for the diameter surrogate");
    rep.surrogate = std::max(rep.base, rep.fiber);
    return rep;
}

double ball_volume_ratio(const MetricState& s, std::size_t center, double r) {
    if (!(r > 0)) throw DomainError("ball radius must be positive");
    const Grid& G = s.grid();
    const int ci = static_cast<int>(center / G.n()), cj = static_cast<int>(center % G.n());
    if (!s.valid[center]) throw DomainError("ball center is not a valid node");
    const int seed = 3;
    const auto d = distances(s, ci, cj, seed);
    double reach = 0;
    for (std::size_t k = 0; k < G.size(); ++k)
        if (std::isfinite(d[k])) reach = std::max(reach, d[k]);
    if (r >= reach) throw DomainError("ball radius exceeds the grid reach");
    const double h = G.h();
    const int sub = 8;
    const double r2 = r * r;
    double vol = 0;
    for (int i = 0; i < G.N; ++i)
        for (int j = 0; j < G.N; ++j) {
            const std::size_t k00 = G.idx(i, j), k10 = G.idx(i + 1, j), k01 = G.idx(i, j + 1),
                              k11 = G.idx(i + 1, j + 1);
            const double dmin = std::min(std::min(d[k00], d[k10]), std::min(d[k01], d[k11]));
            if (!(dmin < r)) continue;
            const bool near = std::abs(i - ci) < seed && std::abs(j - cj) < seed &&
                              std::abs(i + 1 - ci) <= seed && std::abs(j + 1 - cj) <= seed;
            double q[4] = {d[k00] * d[k00], d[k10] * d[k10], d[k01] * d[k01], d[k11] * d[k11]};
            double sd[4] = {std::sqrt(s.det[k00]), std::sqrt(s.det[k10]), std::sqrt(s.det[k01]),
                            std::sqrt(s.det[k11])};
            double acc = 0;
            for (int a = 0; a < sub; ++a)
                for (int b = 0; b < sub; ++b) {
                    const double u = (a + 0.5) / sub, v = (b + 0.5) / sub;
                    double dd;
                    if (near) {
                        const double dq = quad_distance(s, center, (i + u - ci) * h, (j + v - cj) * h);
                        dd = dq * dq;
                    } else {
                        dd = (1 - u) * (1 - v) * q[0] + u * (1 - v) * q[1] + (1 - u) * v * q[2] + u * v * q[3];
                    }
                    if (dd >= r2) continue;
                    const double w = (1 - u) * (1 - v) * sd[0] + u * (1 - v) * sd[1] + (1 - u) * v * sd[2] +
                                     u * v * sd[3];
                    // Fiber disc of radius sqrt(r^2 - d^2), capped by the whole torus.
                    const double disc = M_PI * (r2 - dd);
                    const double torus = 8.0 * M_PI * M_PI * w;
                    acc += 0.5 * w * std::min(disc, torus);
                }
            vol += acc * h * h / (sub * sub);
        }
    return vol / (r2 * r2);
}

}  // namespace toricflow
