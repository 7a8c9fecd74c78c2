#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "toricflow/errors.hpp"
#include "toricflow/flow.hpp"
#include "toricflow/run.hpp"

using namespace toricflow;

namespace {

std::shared_ptr<const Discretization> disc_for(const std::string& name, const std::string& weights, int N) {
    const auto& p = preset(name);
    return Discretization::for_preset(p, weights_for(p, weights), Grid(N, 12.0));
}

double sup_on(const Mask& m, const Field& f) {
    double s = 0;
    for (std::size_t k = 0; k < m.size(); ++k)
        if (m[k]) s = std::max(s, std::abs(f[k]));
    return s;
}

double spread_on(const Mask& m, const Field& f) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t k = 0; k < m.size(); ++k)
        if (m[k]) {
            lo = std::min(lo, f[k]);
            hi = std::max(hi, f[k]);
        }
    return hi - lo;
}

// Integrate to exactly t_end, landing on it.
FlowState integrate_to(FlowSolver& solver, FlowState st, double t_end) {
    while (st.t < t_end - 1e-12) solver.step(st, t_end - st.t);
    return st;
}

}  // namespace

TEST(RicciPotential, VanishesOnTheRoundProduct) {
    const MetricState s = assemble(PotentialField::zero(disc_for("p1xp1", "round", 64), "p1xp1"));
    const RicciPotential h = ricci_potential(s);
    // Per factor -log(sech^2(x/2)/2) - 2 log(2 cosh(x/2)) = log 2 - 2 log 2 is constant.
    double sup = 0;
    for (std::size_t k = 0; k < s.grid().size(); ++k) sup = std::max(sup, std::abs(h.h[k]));
    EXPECT_LT(sup, 1e-6);
    EXPECT_LT(h.sup_abs, 1e-6);
    EXPECT_LT(h.normalization_residual, 1e-8);
}

TEST(RicciPotential, DefiningEquationAndNormalization) {
    for (const auto& name : preset_names()) {
        const auto d = disc_for(name, "default", 96);
        auto p = PotentialField::zero(d, name);
        const auto& G = d->grid();
        for (int i = 0; i <= G.N; ++i)
            for (int j = 0; j <= G.N; ++j) {
                const double x = G.x(i), y = G.x(j);
                p.phi[G.idx(i, j)] = 0.03 * std::exp(-0.15 * ((x - 1) * (x - 1) + y * y));
            }
        const MetricState s = assemble(p);
        const RicciPotential h = ricci_potential(s);
        EXPECT_LT(h.normalization_residual, 1e-8) << name;
        Field e(G.size());
        for (std::size_t k = 0; k < G.size(); ++k) e[k] = std::exp(h.h[k]) - 1.0;
        EXPECT_LT(std::abs(integrate(s, e)) / volume(s), 1e-8) << name;
        // h_jk = Ric_jk - g_jk, with h differentiated independently by the stencils.
        const auto& fd = d->fd();
        const Field h11 = fd.diff(h.h, 2, 0), h12 = fd.diff(h.h, 1, 1), h22 = fd.diff(h.h, 0, 2);
        double r = 0;
        for (std::size_t k = 0; k < G.size(); ++k) {
            if (!s.trusted()[k]) continue;
            r = std::max(r, std::abs(h11[k] - s.ric[0][k] + s.g[0][k]));
            r = std::max(r, std::abs(h12[k] - s.ric[1][k] + s.g[1][k]));
            r = std::max(r, std::abs(h22[k] - s.ric[2][k] + s.g[2][k]));
        }
        EXPECT_LT(r, 1e-2) << name;
        // Bounded: no affine growth toward the box edge.
        EXPECT_LT(h.sup_abs, 2.0) << name;
    }
}

TEST(RicciPotential, DefiningEquationConvergesUnderRefinement) {
    auto residual = [](int N) {
        const auto d = disc_for("bl1", "default", N);
        auto p = PotentialField::zero(d, "bl1");
        const auto& G = d->grid();
        for (int i = 0; i <= G.N; ++i)
            for (int j = 0; j <= G.N; ++j) {
                const double x = G.x(i), y = G.x(j);
                p.phi[G.idx(i, j)] = 0.03 * std::exp(-0.15 * ((x - 1) * (x - 1) + y * y));
            }
        const MetricState s = assemble(p);
        const RicciPotential h = ricci_potential(s);
        const Field h12 = d->fd().diff(h.h, 1, 1);
        double r = 0;
        for (std::size_t k = 0; k < G.size(); ++k)
            if (s.trusted()[k]) r = std::max(r, std::abs(h12[k] - s.ric[1][k] + s.g[1][k]));
        return r;
    };
    const double a = residual(64), b = residual(128);
    EXPECT_GT(a / b, 8.0) << a << " " << b;
    EXPECT_LT(b, 1e-3);
}

TEST(FlowRhs, KahlerEinsteinFixedPointIsSpatiallyConstant) {
    const auto d = disc_for("p1xp1", "round", 64);
    const MetricState s = assemble(PotentialField::zero(d, "p1xp1"));
    const Field h0 = ricci_potential(s).h;
    const FlowRhs r = flow_rhs(PotentialField::zero(d, "p1xp1"), h0);
    EXPECT_LT(spread_on(d->resolved(), r.phidot), 1e-5);
}

TEST(FlowRhs, ConstantShiftAddsTheConstant) {
    const auto d = disc_for("bl2", "default", 48);
    const Field h0 = ricci_potential(assemble(PotentialField::zero(d, "bl2"))).h;
    auto p = PotentialField::zero(d, "bl2");
    const auto& G = d->grid();
    for (int i = 0; i <= G.N; ++i)
        for (int j = 0; j <= G.N; ++j) p.phi[G.idx(i, j)] = 0.02 * std::exp(-0.2 * (G.x(i) * G.x(i) + G.x(j) * G.x(j)));
    const FlowRhs a = flow_rhs(p, h0);
    p.phi += 0.7;
    const FlowRhs b = flow_rhs(p, h0);
    for (std::size_t k = 0; k < G.size(); ++k)
        if (d->resolved()[k]) EXPECT_NEAR(b.phidot[k] - a.phidot[k], 0.7, 1e-9);
    EXPECT_NEAR(b.c - a.c, 0.7, 1e-9);
}

TEST(FlowRhs, LatticeSumReferenceOnCp2IsNotStationary) {
    const auto d = disc_for("cp2", "default", 64);
    const Field h0 = ricci_potential(assemble(PotentialField::zero(d, "cp2"))).h;
    const FlowRhs r = flow_rhs(PotentialField::zero(d, "cp2"), h0);
    EXPECT_GT(spread_on(d->resolved(), r.phidot), 1e-2);
    // At phi = 0 the speed is -h0 directly.
    for (std::size_t k = 0; k < d->grid().size(); ++k)
        if (d->resolved()[k]) EXPECT_NEAR(r.phidot[k], -h0[k], 1e-12);
}

TEST(FlowRhs, MeanMatchesQuadrature) {
    const auto d = disc_for("bl1", "default", 48);
    const MetricState s = assemble(PotentialField::zero(d, "bl1"));
    const Field h0 = ricci_potential(s).h;
    const FlowRhs r = flow_rhs(PotentialField::zero(d, "bl1"), h0);
    EXPECT_NEAR(r.c, integrate(s, r.phidot) / volume(s), 1e-10);
}

TEST(Step, KahlerEinsteinStartOnlyDriftsInTheGauge) {
    const auto d = disc_for("p1xp1", "round", 64);
    FlowSolver solver(d);
    FlowState st = solver.initial(PotentialField::zero(d, "p1xp1"));
    const MetricState s0 = assemble(st.potential);
    const Field phi0 = st.potential.phi;
    double t_prev = st.t;
    while (st.t < 1.0 - 1e-12) {
        const MetricState s = solver.step(st, 1.0 - st.t);
        EXPECT_GT(st.t, t_prev);
        t_prev = st.t;
        EXPECT_LT((st.potential.phi - phi0).abs().maxCoeff(), 5e-3);
        // The metric itself does not move.
        for (int c = 0; c < 3; ++c) EXPECT_LT(sup_on(d->trusted(), s.g[c] - s0.g[c]), 1e-6);
    }
    EXPECT_EQ(st.rejected, 0);
    EXPECT_NEAR(st.t, 1.0, 1e-12);
}

TEST(Step, VolumeIsConservedAlongTheFlow) {
    const auto d = disc_for("bl1", "default", 64);
    FlowSolver solver(d);
    FlowState st = solver.initial(PotentialField::zero(d, "bl1"));
    const double v0 = volume(assemble(st.potential));
    st = integrate_to(solver, st, 1.0);
    const double v1 = volume(assemble(st.potential));
    EXPECT_LT(std::abs(v1 - v0) / v0, 1e-3);
    EXPECT_GT(st.step_index, 1);
}

TEST(Step, RejectionHalvesTheStepUntilBlowupIsSignalled) {
    const auto d = disc_for("bl1", "default", 48);
    FlowOptions opts;
    opts.rm_jump = 0.5;  // every trial counts as a curvature jump
    FlowSolver probe(d);
    const double dt0 = probe.initial(PotentialField::zero(d, "bl1")).dt;
    opts.min_dt = dt0 / 8.5;
    FlowSolver solver(d, opts);
    FlowState st = solver.initial(PotentialField::zero(d, "bl1"));
    ASSERT_NEAR(st.dt, dt0, 1e-15);
    try {
        solver.step(st);
        FAIL() << "expected BlowupSuspected";
    } catch (const BlowupSuspected& e) {
        // dt0, dt0/2, dt0/4, dt0/8 are tried and rejected; dt0/16 is below the floor.
        EXPECT_EQ(st.rejected, 4);
        EXPECT_EQ(e.t, 0.0);
        EXPECT_DOUBLE_EQ(e.peak, st.sup_rm);
        EXPECT_EQ(d->grid().idx(e.i, e.j), st.sup_rm_node);
        EXPECT_TRUE(d->trusted()[st.sup_rm_node]);
    }
    EXPECT_EQ(st.step_index, 0);
}

TEST(Step, SecondOrderInTime) {
    const auto d = disc_for("bl1", "default", 48);
    auto solve = [&](double sigma) {
        FlowOptions o;
        o.sigma = sigma;
        FlowSolver solver(d, o);
        return integrate_to(solver, solver.initial(PotentialField::zero(d, "bl1")), 1.0).potential.phi;
    };
    const Field a = solve(0.4), b = solve(0.2), c = solve(0.1);
    const double e1 = sup_on(d->resolved(), a - b), e2 = sup_on(d->resolved(), b - c);
    EXPECT_GT(std::log2(e1 / e2), 1.8) << e1 << " " << e2;
}

TEST(Step, DtPolicyScalesWithSigmaAndSquaredSpacing) {
    const auto d48 = disc_for("bl3", "default", 48);
    const auto d96 = disc_for("bl3", "default", 96);
    FlowOptions o;
    const MetricState s48 = assemble(PotentialField::zero(d48, "bl3"));
    const MetricState s96 = assemble(PotentialField::zero(d96, "bl3"));
    const double a = FlowSolver(d48, o).suggested_dt(s48);
    o.sigma = 0.1;
    const double b = FlowSolver(d48, o).suggested_dt(s48);
    EXPECT_NEAR(b / a, 0.5, 1e-12);
    const double c = FlowSolver(d96, o).suggested_dt(s96);
    EXPECT_NEAR(c / b, 0.25, 0.02);
}

TEST(Step, SolitonGaugeRemovesTheHolomorphicPart) {
    const auto d = disc_for("bl1", "default", 48);
    FlowSolver solver(d);
    FlowState st = solver.initial(PotentialField::zero(d, "bl1"));
    st = integrate_to(solver, st, 0.5);
    FlowSolver::Projection pr;
    const Eigen::VectorXd v = solver.gauge_speed(st.potential.phi, &pr);
    EXPECT_TRUE(v.allFinite());
    EXPECT_NEAR(pr.v[0], st.velocity[0], 1e-12);
    EXPECT_NEAR(pr.v[1], st.velocity[1], 1e-12);
    EXPECT_NEAR(pr.raw_mean, st.c_of_t, 1e-12);
    // bl1 is pushed along the chopped corner direction.
    EXPECT_LT(st.velocity[1], 0.0);
}

TEST(Run, StationaryRunHasNoRejectionsAndOneRowPerInterval) {
    RunConfig c;
    c.preset = "p1xp1";
    c.weights = "round";
    c.N = 64;
    c.t_end = 1.0;
    c.snapshot_every = 0.25;
    const FlowTrace tr = run(c);
    EXPECT_EQ(tr.rows.size(), 5u);
    EXPECT_EQ(tr.final_state.rejected, 0);
    EXPECT_NEAR(tr.final_state.t, 1.0, 1e-12);
    for (std::size_t i = 0; i < tr.rows.size(); ++i) EXPECT_NEAR(tr.rows[i].t, 0.25 * i, 1e-12);
    ASSERT_TRUE(tr.certificate.has_value());
    EXPECT_EQ(tr.certificate->verdict, Verdict::KE);
}

TEST(Run, RowCountIsFloorOfRatioPlusOne) {
    RunConfig c;
    c.preset = "bl3";
    c.N = 32;
    c.t_end = 0.7;
    c.snapshot_every = 0.3;
    const FlowTrace tr = run(c);
    EXPECT_EQ(tr.rows.size(), 3u);
    EXPECT_NEAR(tr.final_state.t, 0.7, 1e-12);
}

TEST(Run, DeterministicAndHooked) {
    RunConfig c;
    c.preset = "bl2";
    c.N = 32;
    c.t_end = 0.5;
    c.snapshot_every = 0.25;
    std::size_t seen = 0;
    RunHooks hooks;
    hooks.on_row = [&](const DiagnosticsRow&, const FlowState&) { ++seen; };
    const FlowTrace a = run(c, hooks), b = run(c);
    EXPECT_EQ(seen, a.rows.size());
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto u = row_values(a.rows[i]), v = row_values(b.rows[i]);
        ASSERT_EQ(u.size(), v.size());
        for (std::size_t q = 0; q < u.size(); ++q)
            EXPECT_TRUE(u[q] == v[q] || (std::isnan(u[q]) && std::isnan(v[q]))) << "row " << i << " column " << q;
    }
    EXPECT_EQ((a.final_state.potential.phi - b.final_state.potential.phi).abs().maxCoeff(), 0.0);
}

TEST(Run, BumpInitialDataIsConvexAndRelaxes) {
    RunConfig c;
    c.preset = "cp2";
    c.N = 96;
    c.t_end = 1.0;
    c.snapshot_every = 0.5;
    c.initial = "bump";
    c.bump_amplitude = 0.05;
    const FlowTrace tr = run(c);
    ASSERT_EQ(tr.rows.size(), 3u);
    EXPECT_LT(tr.rows.back().oscillation, tr.rows.front().oscillation);
    for (const auto& r : tr.rows) EXPECT_NEAR(r.mean_R, 2.0, 1e-2);
}
