#pragma once

#include <array>
#include <vector>

#include "toricflow/metric.hpp"

namespace toricflow {

// Three-point extrapolation phi[node] = sum c_k phi[src_k].
struct ExtrapolationRule {
    std::size_t node = 0;
    std::array<std::size_t, 3> src{};
    std::array<double, 3> coef{};
    bool copy = false;  // fallback: phi[node] = phi[src[0]]
};

// Splits the grid into PDE nodes (resolved set), constraint nodes (within two
// nodes of it, tied to the interior by exponential extrapolation along a grid
// ray toward the nearest face of the polytope) and far nodes continued as constants
// along the same rays.
class FarField {
public:
    explicit FarField(const Discretization& d, double face_threshold = 1e-2);

    const Mask& pde() const { return pde_; }
    const Mask& constraint() const { return con_; }
    const std::vector<std::size_t>& active() const { return active_; }
    // Index of a node among the active unknowns, or -1.
    long active_index(std::size_t node) const { return active_of_[node]; }
    const std::vector<ExtrapolationRule>& constraint_rules() const { return con_rules_; }
    const std::vector<ExtrapolationRule>& far_rules() const { return far_rules_; }

    void fill(Field& phi) const;

private:
    Mask pde_, con_;
    std::vector<std::size_t> active_;
    std::vector<long> active_of_;
    std::vector<ExtrapolationRule> con_rules_, far_rules_;
};

}  // namespace toricflow
