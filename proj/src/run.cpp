#include "toricflow/run.hpp"

#include <cmath>

#include "toricflow/errors.hpp"
#include "toricflow/snapshot.hpp"

namespace toricflow {

PotentialField initial_potential(const RunConfig& c, std::shared_ptr<const Discretization> d) {
    PotentialField p = PotentialField::zero(d, c.preset, config_weights(c));
    const Grid& G = d->grid();
    if (c.initial == "bump") {
        for (int i = 0; i <= G.N; ++i)
            for (int j = 0; j <= G.N; ++j) {
                const double r2 = G.x(i) * G.x(i) + G.x(j) * G.x(j);
                p.phi[G.idx(i, j)] = c.bump_amplitude * std::exp(-r2 / (c.bump_width * c.bump_width));
            }
    } else if (c.initial == "file") {
        const Snapshot s = read_snapshot(c.initial_file);
        if (s.N != G.N || s.L != G.L || s.preset != c.preset)
            throw ConfigError("key initial_file: snapshot grid or preset does not match the configuration");
        p.phi = s.phi;
        p.gauge_constant = s.gauge_constant;
        p.drift = s.drift;
    }
    return p;
}

FlowTrace run(const RunConfig& c, const RunHooks& hooks) {
    validate(c);
    const FanoPreset& pre = preset(c.preset);
    auto disc = Discretization::for_preset(pre, config_weights(c), Grid(c.N, c.L));
    FlowOptions fo;
    fo.sigma = c.sigma;
    FlowSolver solver(disc, fo);

    FlowTrace tr;
    FlowState st = solver.initial(initial_potential(c, disc));
    MetricState ms = assemble(st.potential);
    if (c.legendre) tr.legendre_initial = legendre_dual_check(ms);
    RowOptions ro;
    ro.lambda1 = c.lambda1;

    auto record = [&](double evo) {
        DiagnosticsRow r = diagnostics_row(ms, st.potential, solver.h0(), ro);
        r.t = st.t;
        r.c_of_t = st.c_of_t;
        r.velocity = st.velocity;
        r.evolution_residual = evo;
        r.dt = st.dt;
        r.steps = st.step_index;
        r.rejected = st.rejected;
        tr.rows.push_back(r);
        if (hooks.on_row) hooks.on_row(r, st);
    };
    record(std::nan(""));

    const long n_rows = static_cast<long>(std::floor(c.t_end / c.snapshot_every + 1e-9));
    long next = 1;
    while (st.t < c.t_end * (1 - 1e-12)) {
        const double target = std::min(static_cast<double>(next) * c.snapshot_every, c.t_end);
        const double t0 = st.t;
        const auto v = st.velocity;
        MetricState fresh;
        try {
            // Two equal steps rather than a sliver before a snapshot.
            const double rest = target - st.t;
            fresh = solver.step(st, rest > st.dt && rest < 2 * st.dt ? 0.5 * rest : rest);
        } catch (const BlowupSuspected&) {
            if (hooks.on_blowup) hooks.on_blowup(rescale_at_peak(ms, st.potential, st.sup_rm, st.sup_rm_node, st.t));
            throw;
        }
        if (std::abs(st.t - target) <= 1e-9 * std::max(1.0, target)) st.t = target;
        MetricState prev = std::move(ms);
        ms = std::move(fresh);
        if (next <= n_rows && st.t == static_cast<double>(next) * c.snapshot_every) {
            record(evolution_residual(prev, ms, st.t - t0,
                                       {0.5 * (v[0] + st.velocity[0]), 0.5 * (v[1] + st.velocity[1])}));
            ++next;
        }
    }

    tr.final_state = st;
    const RicciPotential rp = ricci_potential(ms);
    SolitonCertificate cert = certify_endpoint(ms, rp);
    cert.t = st.t;
    cert.residual_initial = tr.rows.front().soliton_residual;
    tr.certificate = cert;
    tr.lambda1_final = lambda1(ms, 2);
    if (c.legendre) tr.legendre_final = legendre_dual_check(ms);
    std::vector<double> t, osc;
    for (const auto& r : tr.rows) {
        t.push_back(r.t);
        osc.push_back(r.oscillation);
    }
    tr.decay = fit_decay_rate(t, osc);
    return tr;
}

}  // namespace toricflow
