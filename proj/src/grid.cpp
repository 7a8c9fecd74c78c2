#include "toricflow/grid.hpp"

#include <algorithm>
#include <stdexcept>

#include "toricflow/errors.hpp"

namespace toricflow {

Grid::Grid(int N_, double L_) : N(N_), L(L_) {
    if (N < 8 || N % 2 != 0) throw DomainError("grid resolution must be even and at least 8");
    if (!(L > 0)) throw DomainError("grid half width must be positive");
}

std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k > 0; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

Stencil1D::Stencil1D(int n, double h, int order) : order_(order) {
    static const int central[5] = {1, 5, 5, 7, 7};
    width_central_ = central[order];
    const int half = width_central_ / 2;
    start_.resize(n);
    weights_.resize(n);
    for (int i = 0; i < n; ++i) {
        int s, w;
        if (order == 0) {
            s = i;
            w = 1;
        } else if (i - half >= 0 && i + half < n) {
            s = i - half;
            w = width_central_;
        } else {
            w = order + 4;
            s = (i - half < 0) ? 0 : n - w;
        }
        std::vector<double> xs(w);
        for (int k = 0; k < w; ++k) xs[k] = (s + k - i) * h;
        start_[i] = s;
        weights_[i] = fornberg_weights(0.0, xs, order);
    }
}

FiniteDifference::FiniteDifference(const Grid& g) : grid_(g) {
    for (int d = 0; d <= 4; ++d) st_[d] = Stencil1D(g.n(), g.h(), d);
}

Field FiniteDifference::along0(const Field& f, int order) const {
    if (order == 0) return f;
    const int n = grid_.n();
    const auto& st = st_[order];
    Field out = Field::Zero(f.size());
    for (int i = 0; i < n; ++i) {
        const auto& w = st.weights(i);
        const int s = st.start(i);
        for (std::size_t k = 0; k < w.size(); ++k)
            out.segment(static_cast<Eigen::Index>(i) * n, n) +=
                w[k] * f.segment(static_cast<Eigen::Index>(s + k) * n, n);
    }
    return out;
}

Field FiniteDifference::along1(const Field& f, int order) const {
    if (order == 0) return f;
    const int n = grid_.n();
    const auto& st = st_[order];
    Field out(f.size());
    for (int i = 0; i < n; ++i) {
        const double* row = f.data() + static_cast<std::size_t>(i) * n;
        double* o = out.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const auto& w = st.weights(j);
            const int s = st.start(j);
            double acc = 0;
            for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * row[s + k];
            o[j] = acc;
        }
    }
    return out;
}

Field FiniteDifference::diff(const Field& f, int a, int b) const {
    if (a + b > 4) throw DomainError("derivative order above four");
    return along1(along0(f, a), b);
}

double FiniteDifference::diff_at(const Field& f, int a, int b, int i, int j) const {
    const auto& sa = st_[a];
    const auto& sb = st_[b];
    double acc = 0;
    const auto& wa = sa.weights(i);
    const auto& wb = sb.weights(j);
    for (std::size_t p = 0; p < wa.size(); ++p)
        for (std::size_t q = 0; q < wb.size(); ++q)
            acc += wa[p] * wb[q] * f[grid_.idx(sa.start(i) + p, sb.start(j) + q)];
    return acc;
}

SparseMatrix FiniteDifference::matrix(int a, int b) const {
    const int n = grid_.n();
    const auto& sa = st_[a];
    const auto& sb = st_[b];
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(grid_.size() * sa.width() * sb.width());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& wa = sa.weights(i);
            const auto& wb = sb.weights(j);
            for (std::size_t p = 0; p < wa.size(); ++p)
                for (std::size_t q = 0; q < wb.size(); ++q)
                    trip.emplace_back(grid_.idx(i, j), grid_.idx(sa.start(i) + p, sb.start(j) + q),
                                      wa[p] * wb[q]);
        }
    SparseMatrix m(grid_.size(), grid_.size());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

}  // namespace toricflow
