#pragma once

#include <array>
#include <memory>
#include <vector>

#include "toricflow/polytope.hpp"

namespace toricflow {

// Value and partial derivatives up to order four of a potential in the plane.
// Symmetric tensors are stored by the number of indices equal to 2, so
// d3[k] = d^3 F / dx1^(3-k) dx2^k and d4[k] = d^4 F / dx1^(4-k) dx2^k.
struct Jet {
    double f = 0;
    std::array<double, 2> d1{};
    std::array<double, 3> d2{};
    std::array<double, 4> d3{};
    std::array<double, 5> d4{};

    double hess(int a, int b) const { return d2[a + b]; }
    double third(int a, int b, int c) const { return d3[a + b + c]; }
    double fourth(int a, int b, int c, int d) const { return d4[a + b + c + d]; }
};

class Reference {
public:
    virtual ~Reference() = default;
    virtual Jet jet(double x1, double x2) const = 0;
};

// F0(x) = log sum_l w_l exp(<l, x>) over the lattice points of a polytope.
class ToricReference : public Reference {
public:
    ToricReference(const Polytope& p, std::vector<double> weights);
    Jet jet(double x1, double x2) const override;
    const std::vector<LatticePoint>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<LatticePoint> points_;
    std::vector<double> weights_;
    std::vector<double> log_w_;
};

// F = (c/2)|x|^2, the flat model.
class QuadraticReference : public Reference {
public:
    explicit QuadraticReference(double c = 1.0) : c_(c) {}
    Jet jet(double x1, double x2) const override;

private:
    double c_;
};

// Reference multiplied by a positive constant.
class ScaledReference : public Reference {
public:
    ScaledReference(std::shared_ptr<const Reference> base, double c) : base_(std::move(base)), c_(c) {}
    Jet jet(double x1, double x2) const override;

private:
    std::shared_ptr<const Reference> base_;
    double c_;
};

// Weight table named by selector: "default" (all ones) or "round".
std::vector<double> weights_for(const FanoPreset& p, const std::string& selector);

}  // namespace toricflow
