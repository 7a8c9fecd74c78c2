#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace toricflow {

using Field = Eigen::ArrayXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Nodes x_i = -L + i h, i = 0..N, on both axes; flat index i*(N+1) + j with i along x1.
struct Grid {
    int N = 96;
    double L = 12.0;

    Grid() = default;
    Grid(int N, double L);

    int n() const { return N + 1; }
    double h() const { return 2.0 * L / N; }
    double x(int i) const { return -L + i * h(); }
    std::size_t size() const { return static_cast<std::size_t>(n()) * n(); }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n() + j; }
    bool operator==(const Grid&) const = default;
};

// Fornberg weights for the m-th derivative at z from nodes x.
std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m);

// One-dimensional derivative stencils of fourth order: central where they fit,
// shifted windows of order + 4 points near the ends.
class Stencil1D {
public:
    Stencil1D() = default;
    Stencil1D(int n, double h, int order);

    int order() const { return order_; }
    int start(int i) const { return start_[i]; }
    int width() const { return width_central_; }
    int width_at(int i) const { return static_cast<int>(weights_[i].size()); }
    const std::vector<double>& weights(int i) const { return weights_[i]; }

private:
    int order_ = 0;
    int width_central_ = 1;
    std::vector<int> start_;
    std::vector<std::vector<double>> weights_;
};

class FiniteDifference {
public:
    explicit FiniteDifference(const Grid& g);

    const Grid& grid() const { return grid_; }
    const Stencil1D& stencil(int order) const { return st_[order]; }

    // d^(a+b) f / dx1^a dx2^b, a + b <= 4.
    Field diff(const Field& f, int a, int b) const;
    double diff_at(const Field& f, int a, int b, int i, int j) const;
    SparseMatrix matrix(int a, int b) const;

private:
    Field along0(const Field& f, int order) const;
    Field along1(const Field& f, int order) const;

    Grid grid_;
    Stencil1D st_[5];
};

}  // namespace toricflow
