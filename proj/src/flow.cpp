#include "toricflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "toricflow/errors.hpp"

namespace toricflow {

RicciPotential ricci_potential(const MetricState& s) {
    const std::size_t n = s.grid().size();
    RicciPotential rp;
    rp.h = Field::Zero(n);
    for (auto& f : rp.dh) f = Field::Zero(n);
    for (auto& f : rp.ddh) f = Field::Zero(n);
    for (std::size_t k = 0; k < n; ++k)
        if (s.valid[k]) rp.h[k] = -s.logdet[k] - s.F[k];
    // kappa0 = log V - log int e^{h_raw} dV, shifted for range safety.
    double hmax = -INFINITY;
    for (std::size_t k = 0; k < n; ++k)
        if (s.valid[k]) hmax = std::max(hmax, rp.h[k]);
    Field e = Field::Zero(n);
    for (std::size_t k = 0; k < n; ++k)
        if (s.valid[k]) e[k] = std::exp(rp.h[k] - hmax);
    const double V = volume(s);
    const double I = integrate(s, e);
    if (!(I > 0) || !std::isfinite(I)) throw NumericError("Ricci potential normalization failed");
    rp.kappa0 = std::log(V) - std::log(I) - hmax;
    for (std::size_t k = 0; k < n; ++k) {
        if (!s.valid[k]) continue;
        rp.h[k] += rp.kappa0;
        for (int a = 0; a < 2; ++a)
            rp.dh[a][k] = -(s.gamma[4 * a][k] + s.gamma[4 * a + 3][k]) - s.dF[a][k];
        for (int q = 0; q < 3; ++q) rp.ddh[q][k] = s.ric[q][k] - s.g[q][k];
    }
    Field eh = Field::Zero(n);
    for (std::size_t k = 0; k < n; ++k)
        if (s.valid[k]) eh[k] = std::exp(rp.h[k]) - 1.0;
    rp.normalization_residual = std::abs(integrate(s, eh)) / V;
    const auto& T = s.trusted();
    for (std::size_t k = 0; k < n; ++k)
        if (T[k]) rp.sup_abs = std::max(rp.sup_abs, std::abs(rp.h[k]));
    return rp;
}

RicciPotential potential_from_field(const MetricState& s, const Field& h) {
    const auto& fd = s.disc->fd();
    RicciPotential rp;
    rp.h = h;
    rp.dh = {fd.diff(h, 1, 0), fd.diff(h, 0, 1)};
    rp.ddh = {fd.diff(h, 2, 0), fd.diff(h, 1, 1), fd.diff(h, 0, 2)};
    const auto& T = s.trusted();
    for (std::size_t k = 0; k < s.grid().size(); ++k)
        if (T[k]) rp.sup_abs = std::max(rp.sup_abs, std::abs(h[k]));
    return rp;
}

FlowRhs flow_rhs(const PotentialField& p, const Field& h0) {
    const MetricState s = assemble(p);
    const std::size_t n = s.grid().size();
    FlowRhs out;
    out.phidot = Field::Zero(n);
    for (std::size_t k = 0; k < n; ++k)
        if (s.valid[k]) out.phidot[k] = s.logdet[k] - p.disc->logdet0()[k] + p.phi[k] - h0[k];
    out.c = integrate(s, out.phidot) / volume(s);
    return out;
}

struct FlowSolver::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    Eigen::VectorXd mass;  // 1 on PDE rows, 0 on constraint rows
};

FlowSolver::FlowSolver(std::shared_ptr<const Discretization> d, FlowOptions opts)
    : disc_(std::move(d)), opts_(opts), impl_(std::make_unique<Impl>()) {
    ff_ = std::make_unique<FarField>(*disc_);
    const MetricState s0 = assemble(PotentialField::zero(disc_));
    h0_ = ricci_potential(s0).h;
    const auto& act = ff_->active();
    impl_->mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(act.size()));
    for (std::size_t a = 0; a < act.size(); ++a) impl_->mass[a] = ff_->pde()[act[a]] ? 1.0 : 0.0;
}

FlowSolver::~FlowSolver() = default;

Eigen::VectorXd FlowSolver::gauge_speed(const Field& phi, Projection* proj) const {
    const Discretization& D = *disc_;
    const Grid& G = D.grid();
    const auto& fd = D.fd();
    const Field p1 = fd.diff(phi, 1, 0), p2 = fd.diff(phi, 0, 1);
    const Field p11 = fd.diff(phi, 2, 0), p12 = fd.diff(phi, 1, 1), p22 = fd.diff(phi, 0, 2);
    const auto& act = ff_->active();
    const auto& pde = ff_->pde();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(act.size()));
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    double wsum = 0, rsum = 0;
    std::vector<double> r(act.size(), 0.0), f1(act.size(), 0.0), f2(act.size(), 0.0);
    for (std::size_t a = 0; a < act.size(); ++a) {
        const std::size_t k = act[a];
        if (!pde[k]) continue;
        const Jet& jt = D.jets()[k];
        const double h11 = jt.d2[0] + p11[k], h12 = jt.d2[1] + p12[k], h22 = jt.d2[2] + p22[k];
        const double det = h11 * h22 - h12 * h12;
        if (!(det > 0) || !(h11 > 0)) {
            const int i = static_cast<int>(k / G.n()), j = static_cast<int>(k % G.n());
            throw DegenerateMetricError(i, j, G.x(i), G.x(j));
        }
        r[a] = std::log(det) - D.logdet0()[k] + phi[k] - h0_[k];
        f1[a] = jt.d1[0] + p1[k];
        f2[a] = jt.d1[1] + p2[k];
        const Eigen::Vector3d B(1.0, f1[a], f2[a]);
        M.noalias() += det * B * B.transpose();
        b += det * r[a] * B;
        wsum += det;
        rsum += det * r[a];
    }
    const Eigen::Vector3d c = M.ldlt().solve(b);
    for (std::size_t a = 0; a < act.size(); ++a)
        if (pde[act[a]]) out[a] = r[a] - c[0] - c[1] * f1[a] - c[2] * f2[a];
    for (const auto& rule : ff_->constraint_rules()) {
        const long a = ff_->active_index(rule.node);
        out[a] = phi[rule.node] - rule.coef[0] * phi[rule.src[0]] - rule.coef[1] * phi[rule.src[1]] -
                 rule.coef[2] * phi[rule.src[2]];
    }
    if (proj) {
        proj->c = c[0];
        proj->v = {c[1], c[2]};
        proj->raw_mean = rsum / wsum;
    }
    if (!out.allFinite()) throw NumericError("non-finite flow speed");
    return out;
}

FlowState FlowSolver::initial(PotentialField p) const {
    if (p.disc.get() != disc_.get()) throw DomainError("potential belongs to another discretization");
    for (int sweep = 0; sweep < 200; ++sweep) {
        double change = 0;
        for (const auto& rule : ff_->constraint_rules()) {
            const double v = rule.coef[0] * p.phi[rule.src[0]] + rule.coef[1] * p.phi[rule.src[1]] +
                             rule.coef[2] * p.phi[rule.src[2]];
            change = std::max(change, std::abs(v - p.phi[rule.node]));
            p.phi[rule.node] = v;
        }
        if (change < 1e-15) break;
    }
    ff_->fill(p.phi);
    FlowState st;
    st.potential = std::move(p);
    const MetricState s = assemble(st.potential);
    Projection pr;
    gauge_speed(st.potential.phi, &pr);
    st.c_of_t = pr.raw_mean;
    st.velocity = pr.v;
    const auto& T = disc_->trusted();
    for (std::size_t k = 0; k < s.grid().size(); ++k)
        if (T[k] && std::sqrt(std::max(s.rm2[k], 0.0)) > st.sup_rm) {
            st.sup_rm = std::sqrt(std::max(s.rm2[k], 0.0));
            st.sup_rm_node = k;
        }
    st.dt = suggested_dt(s);
    return st;
}

double FlowSolver::suggested_dt(const MetricState& s) const {
    const double h = s.grid().h();
    double ric = 0;
    const auto& T = s.trusted();
    for (std::size_t k = 0; k < s.grid().size(); ++k)
        if (T[k]) ric = std::max(ric, std::sqrt(std::max(s.ric2[k], 0.0)));
    return opts_.sigma * 16.0 * h * h / (1.0 + ric);
}

MetricState FlowSolver::step(FlowState& st, double limit) {
    const Discretization& D = *disc_;
    const Grid& G = D.grid();
    const auto& fd = D.fd();
    const auto& act = ff_->active();
    const auto& pde = ff_->pde();
    const Eigen::Index na = static_cast<Eigen::Index>(act.size());
    const double gamma = 1.0 + 1.0 / std::sqrt(2.0);
    Field& phi = st.potential.phi;

    // Jacobian of the unprojected speed on PDE rows: F^{jk} D_jk + I.
    const Field p11 = fd.diff(phi, 2, 0), p12 = fd.diff(phi, 1, 1), p22 = fd.diff(phi, 0, 2);
    const auto& s1 = fd.stencil(1);
    const auto& s2 = fd.stencil(2);
    std::vector<Eigen::Triplet<double>> jac;
    jac.reserve(static_cast<std::size_t>(na) * 36);
    for (Eigen::Index a = 0; a < na; ++a) {
        const std::size_t k = act[a];
        if (!pde[k]) continue;
        const int i = static_cast<int>(k / G.n()), j = static_cast<int>(k % G.n());
        const Jet& jt = D.jets()[k];
        const double h11 = jt.d2[0] + p11[k], h12 = jt.d2[1] + p12[k], h22 = jt.d2[2] + p22[k];
        const double det = h11 * h22 - h12 * h12;
        const double i11 = h22 / det, i12 = -h12 / det, i22 = h11 / det;
        auto col = [&](int ii, int jj) {
            const long c = ff_->active_index(G.idx(ii, jj));
            if (c < 0) throw DomainError("PDE stencil reaches an inactive node");
            return static_cast<int>(c);
        };
        jac.emplace_back(a, a, 1.0);
        for (int p = 0; p < s2.width_at(i); ++p)
            jac.emplace_back(a, col(s2.start(i) + p, j), i11 * s2.weights(i)[p]);
        for (int q = 0; q < s2.width_at(j); ++q)
            jac.emplace_back(a, col(i, s2.start(j) + q), i22 * s2.weights(j)[q]);
        for (int p = 0; p < s1.width_at(i); ++p)
            for (int q = 0; q < s1.width_at(j); ++q)
                jac.emplace_back(a, col(s1.start(i) + p, s1.start(j) + q),
                                 2.0 * i12 * s1.weights(i)[p] * s1.weights(j)[q]);
    }
    for (const auto& rule : ff_->constraint_rules()) {
        const long a = ff_->active_index(rule.node);
        jac.emplace_back(a, a, 1.0);
        for (int s = 0; s < 3; ++s) jac.emplace_back(a, ff_->active_index(rule.src[s]), -rule.coef[s]);
    }
    Eigen::SparseMatrix<double> J(na, na);
    J.setFromTriplets(jac.begin(), jac.end());

    Eigen::VectorXd u(na);
    for (Eigen::Index a = 0; a < na; ++a) u[a] = phi[act[a]];
    Projection pr;
    const Eigen::VectorXd f1 = gauge_speed(phi, &pr);

    double dt = std::min(st.dt, limit);
    while (true) {
        if (dt < opts_.min_dt) {
            const int i = static_cast<int>(st.sup_rm_node / G.n()), j = static_cast<int>(st.sup_rm_node % G.n());
            throw BlowupSuspected(st.t, i, j, st.sup_rm);
        }
        try {
            Eigen::SparseMatrix<double> A = -gamma * dt * J;
            for (Eigen::Index a = 0; a < na; ++a)
                if (impl_->mass[a] != 0) A.coeffRef(a, a) += 1.0;
            A.makeCompressed();
            if (!impl_->analyzed) {
                impl_->lu.analyzePattern(A);
                impl_->analyzed = true;
            }
            impl_->lu.factorize(A);
            if (impl_->lu.info() != Eigen::Success) throw NumericError("sparse factorization failed");
            const Eigen::VectorXd k1 = impl_->lu.solve(f1);
            Field trial = phi;
            for (Eigen::Index a = 0; a < na; ++a) trial[act[a]] = u[a] + dt * k1[a];
            const Eigen::VectorXd f2 = gauge_speed(trial);
            const Eigen::VectorXd k2 = impl_->lu.solve(f2 - 2.0 * impl_->mass.cwiseProduct(k1));
            PotentialField next = st.potential;
            for (Eigen::Index a = 0; a < na; ++a) next.phi[act[a]] = u[a] + 1.5 * dt * k1[a] + 0.5 * dt * k2[a];
            ff_->fill(next.phi);
            MetricState ms = assemble(next);
            double sup = 0;
            std::size_t node = 0;
            const auto& T = D.trusted();
            for (std::size_t k = 0; k < G.size(); ++k)
                if (T[k] && std::sqrt(std::max(ms.rm2[k], 0.0)) > sup) {
                    sup = std::sqrt(std::max(ms.rm2[k], 0.0));
                    node = k;
                }
            if (!std::isfinite(sup)) throw NumericError("non-finite curvature");
            if (st.sup_rm > 0 && sup > opts_.rm_jump * st.sup_rm) throw NumericError("curvature jump");
            next.gauge_constant += dt * pr.c;
            next.drift[0] += dt * pr.v[0];
            next.drift[1] += dt * pr.v[1];
            st.potential = std::move(next);
            st.t += dt;
            ++st.step_index;
            st.sup_rm = sup;
            st.sup_rm_node = node;
            Projection pn;
            gauge_speed(st.potential.phi, &pn);
            st.c_of_t = pn.raw_mean;
            st.velocity = pn.v;
            st.dt = suggested_dt(ms);
            return ms;
        } catch (const NumericError&) {
            dt *= 0.5;
            ++st.rejected;
        }
    }
}

}  // namespace toricflow
