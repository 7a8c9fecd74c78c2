#include "toricflow/farfield.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "toricflow/errors.hpp"

namespace toricflow {

namespace {

constexpr int kSteps[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

struct Face {
    std::vector<std::array<int, 2>> steps;  // candidate rays, best first
    LatticePoint vertex{};                  // reference point on the face
    bool polynomial = false;                // no face nearby
};

// Extrapolation weights for value at s = 0 from s = 1, 2, 3 in the basis {1, e^{a s}, e^{b s}}
// (or {1, s, s^2} when rates are absent).
std::array<double, 3> weights(double a, double b, double h, bool poly) {
    auto basis = [&](double s) -> std::array<double, 3> {
        if (poly) return {1.0, s, s * s};
        return {1.0, std::exp(a * s * h), std::exp(b * s * h)};
    };
    double M[3][3];
    for (int r = 0; r < 3; ++r) {
        auto v = basis(r + 1.0);
        for (int c = 0; c < 3; ++c) M[c][r] = v[c];
    }
    auto rhs = basis(0.0);
    // Solve M c = rhs by Cramer's rule.
    auto det3 = [](double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double d = det3(M);
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        double T[3][3];
        for (int r = 0; r < 3; ++r)
            for (int q = 0; q < 3; ++q) T[r][q] = (q == c) ? rhs[r] : M[r][q];
        out[c] = det3(T) / d;
    }
    return out;
}

}  // namespace

FarField::FarField(const Discretization& D, double thr) {
    const Grid& G = D.grid();
    const std::size_t n = G.size();
    const FanoPreset* pre = D.preset();
    if (!pre) throw DomainError("far field needs a preset discretization");
    const auto& poly = pre->polytope;
    const auto& edges = poly.edges();
    const auto& verts = poly.vertices();
    const auto& lattice = poly.lattice_points();

    pde_ = D.resolved();
    // Chebyshev distance layers from the PDE set.
    std::vector<int> layer(n, -1);
    std::deque<std::size_t> queue;
    for (std::size_t k = 0; k < n; ++k)
        if (pde_[k]) {
            layer[k] = 0;
            queue.push_back(k);
        }
    if (queue.empty()) throw DomainError("empty resolved set");
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        const int i = static_cast<int>(k / G.n()), j = static_cast<int>(k % G.n());
        for (const auto& s : kSteps) {
            const int a = i + s[0], b = j + s[1];
            if (a < 0 || b < 0 || a > G.N || b > G.N) continue;
            const std::size_t q = G.idx(a, b);
            if (layer[q] >= 0) continue;
            layer[q] = layer[k] + 1;
            queue.push_back(q);
        }
    }
    con_.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) con_[k] = (layer[k] == 1 || layer[k] == 2);

    auto face_at = [&](std::size_t k) {
        const auto& jt = D.jets()[k];
        std::vector<int> near;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const double d = edges[e].support - edges[e].normal[0] * jt.d1[0] - edges[e].normal[1] * jt.d1[1];
            if (d < thr) near.push_back(static_cast<int>(e));
        }
        Face f;
        const int i = static_cast<int>(k / G.n()), j = static_cast<int>(k % G.n());
        std::vector<std::array<int, 2>> all;
        for (const auto& s : kSteps) all.push_back({s[0], s[1]});
        if (near.size() == 1) {
            const auto& e = edges[near[0]];
            std::array<int, 2> st{static_cast<int>(-e.normal[0]), static_cast<int>(-e.normal[1])};
            if (std::abs(st[0]) > 1 || std::abs(st[1]) > 1) {
                std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
                    return (a[0] * st[0] + a[1] * st[1]) / std::hypot(a[0], a[1]) >
                           (b[0] * st[0] + b[1] * st[1]) / std::hypot(b[0], b[1]);
                });
                st = all[0];
            }
            f.steps = {st};
            f.vertex = verts[e.from];
        } else if (near.size() == 2) {
            const auto& ea = edges[near[0]];
            const auto& eb = edges[near[1]];
            int v;
            if (ea.to == eb.from) v = ea.to;
            else if (eb.to == ea.from) v = eb.to;
            else v = ea.from;
            f.vertex = verts[v];
            const std::size_t m = verts.size();
            const auto& p = verts[(v + m - 1) % m];
            const auto& q = verts[(v + 1) % m];
            const double d[2][2] = {{double(p[0] - verts[v][0]), double(p[1] - verts[v][1])},
                                    {double(q[0] - verts[v][0]), double(q[1] - verts[v][1])}};
            auto score = [&](const std::array<int, 2>& s) {
                double best = 1e9;
                for (const auto& dd : d)
                    best = std::min(best, (dd[0] * s[0] + dd[1] * s[1]) / std::hypot(dd[0], dd[1]));
                return best / std::hypot(s[0], s[1]);
            };
            std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) { return score(a) > score(b); });
            f.steps.assign(all.begin(), all.begin() + 3);
        } else {
            f.polynomial = true;
            const double x1 = G.x(i), x2 = G.x(j);
            std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
                return (a[0] * x1 + a[1] * x2) / std::hypot(a[0], a[1]) <
                       (b[0] * x1 + b[1] * x2) / std::hypot(b[0], b[1]);
            });
            f.steps.assign(all.begin(), all.begin() + 3);
        }
        return f;
    };

    auto make_rule = [&](std::size_t k, const Face& f, auto&& usable, ExtrapolationRule& rule) {
        const int i = static_cast<int>(k / G.n()), j = static_cast<int>(k % G.n());
        for (const auto& st : f.steps) {
            std::array<std::size_t, 3> src;
            bool ok = true;
            for (int s = 1; s <= 3 && ok; ++s) {
                const int a = i + s * st[0], b = j + s * st[1];
                if (a < 0 || b < 0 || a > G.N || b > G.N) {
                    ok = false;
                    break;
                }
                src[s - 1] = G.idx(a, b);
                ok = usable(src[s - 1]);
            }
            if (!ok) continue;
            double ra = 0, rb = 0;
            bool poly = f.polynomial;
            if (!poly) {
                std::set<long> rates;
                for (const auto& l : lattice) {
                    const long r = (l[0] - f.vertex[0]) * st[0] + (l[1] - f.vertex[1]) * st[1];
                    if (r > 0) rates.insert(r);
                }
                if (rates.empty()) {
                    poly = true;
                } else {
                    auto it = rates.begin();
                    ra = static_cast<double>(*it);
                    rb = (++it != rates.end()) ? static_cast<double>(*it) : 2 * ra;
                }
            }
            rule.node = k;
            rule.src = src;
            rule.coef = weights(ra, rb, G.h(), poly);
            rule.copy = false;
            return true;
        }
        return false;
    };

    for (std::size_t k = 0; k < n; ++k) {
        if (!con_[k]) continue;
        ExtrapolationRule rule;
        const Face f = face_at(k);
        if (!make_rule(k, f, [&](std::size_t q) { return pde_[q] || con_[q]; }, rule)) {
            const int i = static_cast<int>(k / G.n()), j = static_cast<int>(k % G.n());
            throw DomainError("no extrapolation ray for constraint node (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
        }
        con_rules_.push_back(rule);
    }

    active_of_.assign(n, -1);
    for (std::size_t k = 0; k < n; ++k)
        if (pde_[k] || con_[k]) {
            active_of_[k] = static_cast<long>(active_.size());
            active_.push_back(k);
        }

    // Far nodes, layer by layer.
    std::vector<std::uint8_t> known(n, 0);
    int max_layer = 0;
    for (std::size_t k = 0; k < n; ++k) {
        known[k] = pde_[k] || con_[k];
        max_layer = std::max(max_layer, layer[k]);
    }
    for (int L = 3; L <= max_layer; ++L) {
        std::vector<ExtrapolationRule> batch;
        for (std::size_t k = 0; k < n; ++k) {
            if (layer[k] != L) continue;
            ExtrapolationRule rule;
            const Face f = face_at(k);
            // Constant continuation along the extrapolation ray.
            if (!f.polynomial && make_rule(k, f, [&](std::size_t q) { return known[q] != 0; }, rule)) {
                rule.copy = true;
            } else {
                const int i = static_cast<int>(k / G.n()), j = static_cast<int>(k % G.n());
                rule = ExtrapolationRule{};
                rule.node = k;
                rule.copy = true;
                bool found = false;
                for (const auto& s : kSteps) {
                    const int a = i + s[0], b = j + s[1];
                    if (a < 0 || b < 0 || a > G.N || b > G.N) continue;
                    if (known[G.idx(a, b)]) {
                        rule.src[0] = G.idx(a, b);
                        found = true;
                        break;
                    }
                }
                if (!found) throw DomainError("far-field fill has no known neighbour");
            }
            batch.push_back(rule);
        }
        for (const auto& r : batch) {
            known[r.node] = 1;
            far_rules_.push_back(r);
        }
    }
}

void FarField::fill(Field& phi) const {
    for (const auto& r : far_rules_) {
        if (r.copy) phi[r.node] = phi[r.src[0]];
        else phi[r.node] = r.coef[0] * phi[r.src[0]] + r.coef[1] * phi[r.src[1]] + r.coef[2] * phi[r.src[2]];
    }
}

}  // namespace toricflow
