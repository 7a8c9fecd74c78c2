#include "toricflow/reference.hpp"

#include <algorithm>
#include <cmath>

#include "toricflow/errors.hpp"

namespace toricflow {

ToricReference::ToricReference(const Polytope& p, std::vector<double> weights)
    : points_(p.lattice_points()), weights_(std::move(weights)) {
    if (weights_.empty()) weights_.assign(points_.size(), 1.0);
    if (weights_.size() != points_.size())
        throw DomainError("weight table size " + std::to_string(weights_.size()) +
                          " does not match " + std::to_string(points_.size()) + " lattice points");
    for (double w : weights_) {
        if (!(w > 0.0)) throw DomainError("reference weights must be strictly positive");
        log_w_.push_back(std::log(w));
    }
}

Jet ToricReference::jet(double x1, double x2) const {
    const std::size_t n = points_.size();
    double e[64];
    std::vector<double> heap;
    double* ex = e;
    if (n > 64) {
        heap.resize(n);
        ex = heap.data();
    }
    double m = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        ex[k] = points_[k][0] * x1 + points_[k][1] * x2 + log_w_[k];
        m = std::max(m, ex[k]);
    }
    double s = 0;
    for (std::size_t k = 0; k < n; ++k) {
        ex[k] = std::exp(ex[k] - m);
        s += ex[k];
    }
    Jet j;
    j.f = m + std::log(s);
    double mu0 = 0, mu1 = 0;
    for (std::size_t k = 0; k < n; ++k) {
        ex[k] /= s;
        mu0 += ex[k] * points_[k][0];
        mu1 += ex[k] * points_[k][1];
    }
    j.d1 = {mu0, mu1};
    // Central moments of the lattice distribution.
    double m2[3] = {0, 0, 0}, m3[4] = {0, 0, 0, 0}, m4[5] = {0, 0, 0, 0, 0};
    for (std::size_t k = 0; k < n; ++k) {
        const double a = points_[k][0] - mu0, b = points_[k][1] - mu1, p = ex[k];
        const double aa = a * a, bb = b * b;
        m2[0] += p * aa;
        m2[1] += p * a * b;
        m2[2] += p * bb;
        m3[0] += p * aa * a;
        m3[1] += p * aa * b;
        m3[2] += p * a * bb;
        m3[3] += p * bb * b;
        m4[0] += p * aa * aa;
        m4[1] += p * aa * a * b;
        m4[2] += p * aa * bb;
        m4[3] += p * a * bb * b;
        m4[4] += p * bb * bb;
    }
    j.d2 = {m2[0], m2[1], m2[2]};
    j.d3 = {m3[0], m3[1], m3[2], m3[3]};
    // Fourth cumulant: m4 minus the three pairings of the covariance.
    j.d4[0] = m4[0] - 3 * m2[0] * m2[0];
    j.d4[1] = m4[1] - 3 * m2[0] * m2[1];
    j.d4[2] = m4[2] - m2[0] * m2[2] - 2 * m2[1] * m2[1];
    j.d4[3] = m4[3] - 3 * m2[2] * m2[1];
    j.d4[4] = m4[4] - 3 * m2[2] * m2[2];
    return j;
}

Jet QuadraticReference::jet(double x1, double x2) const {
    Jet j;
    j.f = 0.5 * c_ * (x1 * x1 + x2 * x2);
    j.d1 = {c_ * x1, c_ * x2};
    j.d2 = {c_, 0.0, c_};
    return j;
}

Jet ScaledReference::jet(double x1, double x2) const {
    Jet j = base_->jet(x1, x2);
    j.f *= c_;
    for (auto& v : j.d1) v *= c_;
    for (auto& v : j.d2) v *= c_;
    for (auto& v : j.d3) v *= c_;
    for (auto& v : j.d4) v *= c_;
    return j;
}

std::vector<double> weights_for(const FanoPreset& p, const std::string& selector) {
    if (selector == "default") return std::vector<double>(p.polytope.lattice_points().size(), 1.0);
    if (selector == "round") {
        if (p.round_weights.empty())
            throw ConfigError("preset " + p.name + " has no round weight table (available: cp2, p1xp1)");
        return p.round_weights;
    }
    throw ConfigError("weights selector must be default, round or an explicit table");
}

}  // namespace toricflow
