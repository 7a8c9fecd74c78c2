#pragma once

#include <array>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace toricflow {

using LatticePoint = std::array<long, 2>;

struct Edge {
    int from = 0;                // index into vertices
    int to = 0;
    LatticePoint normal{};       // primitive outward normal
    LatticePoint direction{};    // primitive direction from -> to
    long lattice_length = 0;
    long support = 0;            // <v, normal> on the edge
};

// Exact rational number with a positive denominator, reduced.
struct Rational {
    long num = 0;
    long den = 1;
    static Rational make(long n, long d);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

class Polytope {
public:
    Polytope() = default;
    explicit Polytope(std::vector<LatticePoint> ccw_vertices);

    const std::vector<LatticePoint>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<LatticePoint>& lattice_points() const { return points_; }

    Rational area() const;
    std::array<Rational, 2> barycenter() const;
    bool contains(const LatticePoint& p) const;

    bool is_convex() const;
    bool is_delzant() const;
    bool is_reflexive() const;

private:
    std::vector<LatticePoint> vertices_;
    std::vector<Edge> edges_;
    std::vector<LatticePoint> points_;
};

struct IntersectionForm {
    std::vector<std::vector<long>> matrix;
    std::vector<std::string> basis_labels;

    std::size_t rank() const { return matrix.size(); }
    bool is_symmetric() const;
    long determinant() const;
    bool is_unimodular() const { return std::abs(determinant()) == 1; }
    // (positive, negative) eigenvalue counts.
    std::pair<int, int> signature() const;
    long evaluate(const std::vector<long>& v) const;
};

struct FanoPreset {
    std::string name;
    Polytope polytope;
    IntersectionForm intersection_form;
    long c1_squared = 0;
    int b2 = 0;
    bool futaki_expected_zero = false;
    // Weight table reproducing a symmetric reference metric; empty if none.
    std::vector<double> round_weights;
};

const std::vector<std::string>& preset_names();
const FanoPreset& preset(std::string_view name);

// Target divisor areas, one per edge in polytope order.
std::vector<double> divisor_targets(const FanoPreset& p);

std::optional<std::vector<long>> minus_two_class_search(const IntersectionForm& form,
                                                         long bound);

nlohmann::json preset_json(const FanoPreset& p);
nlohmann::json catalog_json();

}  // namespace toricflow
