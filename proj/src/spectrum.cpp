#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "toricflow/diagnostics.hpp"

namespace toricflow {

namespace {

using Sparse = Eigen::SparseMatrix<double>;

// Bilinear elements with 2 x 2 Gauss points.  For the torus mode m the weak form is
// int C grad a . grad b + (1/4)(m.C m) a b = lambda int det F a b, C = cof(D^2 F).
void assemble_mode(const MetricState& s, int m1, int m2, Sparse& K, Sparse& M) {
    const Grid& G = s.grid();
    const double h = G.h();
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(G.size() * 16);
    mt.reserve(G.size() * 16);
    for (int i = 0; i < G.N; ++i)
        for (int j = 0; j < G.N; ++j) {
            const std::size_t nodes[4] = {G.idx(i, j), G.idx(i + 1, j), G.idx(i, j + 1), G.idx(i + 1, j + 1)};
            double ke[4][4] = {}, me[4][4] = {};
            for (double u : gp)
                for (double v : gp) {
                    const double N[4] = {(1 - u) * (1 - v), u * (1 - v), (1 - u) * v, u * v};
                    const double dNu[4] = {-(1 - v), (1 - v), -v, v};
                    const double dNv[4] = {-(1 - u), -u, (1 - u), u};
                    double g11 = 0, g12 = 0, g22 = 0;
                    for (int a = 0; a < 4; ++a) {
                        g11 += N[a] * s.g[0][nodes[a]];
                        g12 += N[a] * s.g[1][nodes[a]];
                        g22 += N[a] * s.g[2][nodes[a]];
                    }
                    const double det = g11 * g22 - g12 * g12;
                    const double c11 = g22, c12 = -g12, c22 = g11;
                    const double mm = 0.25 * (c11 * m1 * m1 + 2 * c12 * m1 * m2 + c22 * m2 * m2);
                    const double w = 0.25 * h * h;
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b) {
                            const double ax = dNu[a] / h, ay = dNv[a] / h, bx = dNu[b] / h, by = dNv[b] / h;
                            ke[a][b] += w * (c11 * ax * bx + c12 * (ax * by + ay * bx) + c22 * ay * by +
                                             mm * N[a] * N[b]);
                            me[a][b] += w * det * N[a] * N[b];
                        }
                }
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    kt.emplace_back(nodes[a], nodes[b], ke[a][b]);
                    mt.emplace_back(nodes[a], nodes[b], me[a][b]);
                }
        }
    const auto n = static_cast<Eigen::Index>(G.size());
    K.resize(n, n);
    M.resize(n, n);
    K.setFromTriplets(kt.begin(), kt.end());
    M.setFromTriplets(mt.begin(), mt.end());
}

// Smallest `count` eigenvalues of K x = lambda M x by shift-invert subspace iteration.
std::optional<std::vector<double>> smallest(const Sparse& K, const Sparse& M, int count) {
    const double shift = -0.5;
    Sparse A = K - shift * M;
    Eigen::SimplicialLDLT<Sparse> ldlt(A);
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    const int b = count + 4;
    const Eigen::Index n = K.rows();
    Eigen::MatrixXd X(n, b);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < b; ++c) X(i, c) = std::cos(0.37 * (c + 1) * static_cast<double>(i) + 0.11 * c) + (c == 0);
    std::vector<double> prev(count, INFINITY);
    for (int it = 0; it < 500; ++it) {
        Eigen::MatrixXd Y = ldlt.solve(M * X);
        const Eigen::MatrixXd Ks = Y.transpose() * (K * Y);
        const Eigen::MatrixXd Ms = Y.transpose() * (M * Y);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (Ks + Ks.transpose()),
                                                                      0.5 * (Ms + Ms.transpose()));
        if (ges.info() != Eigen::Success) return std::nullopt;
        X = Y * ges.eigenvectors();
        bool done = true;
        std::vector<double> cur(count);
        for (int c = 0; c < count; ++c) {
            cur[c] = ges.eigenvalues()[c];
            if (std::abs(cur[c] - prev[c]) > 1e-11 * (1 + std::abs(cur[c]))) done = false;
        }
        prev = cur;
        if (done && it > 2) return cur;
    }
    return std::nullopt;
}

}  // namespace

std::optional<double> lambda1(const MetricState& s, int max_mode) {
    if (max_mode < 0) return std::nullopt;
    double best = INFINITY;
    for (int m1 = 0; m1 <= max_mode; ++m1)
        for (int m2 = -max_mode; m2 <= max_mode; ++m2) {
            if (m1 == 0 && m2 < 0) continue;
            Sparse K, M;
            assemble_mode(s, m1, m2, K, M);
            const bool constant_mode = m1 == 0 && m2 == 0;
            const auto ev = smallest(K, M, constant_mode ? 2 : 1);
            if (!ev) return std::nullopt;
            best = std::min(best, constant_mode ? (*ev)[1] : (*ev)[0]);
        }
    return best;
}

}  // namespace toricflow
