#include "toricflow/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "toricflow/errors.hpp"
#include "toricflow/run.hpp"
#include "toricflow/snapshot.hpp"

namespace fs = std::filesystem;

namespace toricflow {

namespace {

Snapshot make_snapshot(const RunConfig& c, const PotentialField& p, double t) {
    Snapshot s;
    s.preset = c.preset;
    s.weights = c.weights;
    s.N = c.N;
    s.L = c.L;
    s.t = t;
    s.gauge_constant = p.gauge_constant;
    s.drift = p.drift;
    s.phi = p.phi;
    return s;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json legendre_json(const LegendreReport& r) {
    return {{"max_mismatch", r.max_mismatch}, {"max_gradient_error", r.max_gradient_error}, {"samples", r.samples}};
}

std::string pct(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << 100 * v << "%";
    return os.str();
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

double max_of(const std::vector<double>& v) {
    double m = -INFINITY;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, x);
    return m;
}

double min_of(const std::vector<double>& v) {
    double m = INFINITY;
    for (double x : v)
        if (std::isfinite(x)) m = std::min(m, x);
    return m;
}

double rel_drift(const std::vector<double>& v) {
    double d = 0;
    for (double x : v) d = std::max(d, std::abs(x - v.front()) / std::abs(v.front()));
    return d;
}

}  // namespace

std::string catalog_path() { return std::string(TORICFLOW_DATA_DIR) + "/presets.json"; }

int command_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
    RunConfig c;
    try {
        c = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
    return command_run(c, out, err);
}

int command_run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate(c);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
    const fs::path dir(c.output);
    fs::create_directories(dir / "snapshots");
    {
        std::ofstream cfg(dir / "config.txt");
        cfg << serialize_config(c);
    }
    std::ofstream csv(dir / "diagnostics.csv");
    write_csv_header(csv, preset(c.preset).polytope.edges().size());
    long row_index = 0;
    RunHooks hooks;
    hooks.on_row = [&](const DiagnosticsRow& r, const FlowState& st) {
        write_csv_row(csv, r);
        csv.flush();
        char name[32];
        std::snprintf(name, sizeof name, "snap_%04ld.txt", row_index++);
        write_snapshot((dir / "snapshots" / name).string(), make_snapshot(c, st.potential, st.t));
        out << "t = " << num(r.t) << "  sup|Rm| = " << num(r.sup_rm) << "  soliton residual = "
            << num(r.soliton_residual) << '\n';
    };
    hooks.on_blowup = [&](const BlowupEvent& e) {
        nlohmann::json j = blowup_json(e);
        j["rescaled_snapshot"] = "blowup_rescaled.txt";
        write_json(dir / "blowup.json", j);
        Snapshot s = make_snapshot(c, e.rescaled, e.t);
        write_snapshot((dir / "blowup_rescaled.txt").string(), s);
    };
    auto finish_plots = [&]() {
        csv.close();
        write_plot_data((dir / "plot").string(), read_csv((dir / "diagnostics.csv").string()));
    };
    try {
        const FlowTrace tr = run(c, hooks);
        nlohmann::json cert = certificate_json(*tr.certificate);
        cert["lambda1"] = tr.lambda1_final ? nlohmann::json(*tr.lambda1_final) : nlohmann::json("unavailable");
        cert["decay"] = {{"ok", tr.decay.ok}, {"alpha", tr.decay.alpha}, {"residual", tr.decay.residual},
                         {"note", tr.decay.note}};
        if (tr.legendre_initial) cert["legendre_initial"] = legendre_json(*tr.legendre_initial);
        if (tr.legendre_final) cert["legendre_final"] = legendre_json(*tr.legendre_final);
        cert["steps"] = tr.final_state.step_index;
        cert["rejected_steps"] = tr.final_state.rejected;
        cert["blowup_events"] = 0;
        write_json(dir / "certificate.json", cert);
        finish_plots();
        out << "verdict: " << cert["verdict"].get<std::string>() << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        finish_plots();
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const BlowupSuspected& e) {
        finish_plots();
        err << e.what() << '\n';
        return kExitBlowup;
    } catch (const std::exception& e) {
        finish_plots();
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

std::string command_report(const std::string& dir_s) {
    const fs::path dir(dir_s);
    const bool has_csv = fs::exists(dir / "diagnostics.csv");
    const bool has_cert = fs::exists(dir / "certificate.json");
    const bool has_blow = fs::exists(dir / "blowup.json");
    std::ostringstream os;
    if (!has_csv && !has_cert && !has_blow) {
        os << "status: no run found in " << dir_s << '\n';
        return os.str();
    }
    if (fs::exists(dir / "config.txt")) {
        try {
            const RunConfig c = load_config((dir / "config.txt").string());
            os << "run: preset " << c.preset << ", weights " << c.weights << ", N = " << c.N << ", L = " << c.L
               << ", t_end = " << c.t_end << '\n';
        } catch (const ConfigError& e) {
            os << "config.txt: unreadable (" << e.what() << ")\n";
        }
    } else {
        os << "config.txt: missing\n";
    }
    os << "status: " << (has_cert ? "completed" : has_blow ? "aborted (blow-up suspected)" : "partial") << '\n';

    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        os << "  [" << (pass ? "PASS" : "FAIL") << "] " << name << ": " << detail << '\n';
    };

    double fut_norm = NAN;
    if (has_csv) {
        const CsvTable t = read_csv((dir / "diagnostics.csv").string());
        os << "rows: " << t.rows.size() << '\n';
        if (!t.rows.empty()) {
            const auto tt = t.column("t");
            os << "time range: [" << num(tt.front()) << ", " << num(tt.back()) << "]\n";
            const double D = std::max({max_of(t.column("sup_R")), max_of(t.column("diameter")),
                                       max_of(t.column("h_sup")), max_of(t.column("grad_h_sup"))});
            const auto kap = t.column("kappa_min");
            os << "observed Perelman constants: D = " << num(D) << " (sup|R| " << num(max_of(t.column("sup_R")))
               << ", diameter " << num(max_of(t.column("diameter"))) << ", |h| " << num(max_of(t.column("h_sup")))
               << ", |grad h| " << num(max_of(t.column("grad_h_sup"))) << "), kappa = " << num(min_of(kap))
               << '\n';
            const double vol = rel_drift(t.column("volume"));
            double div = 0;
            for (const auto& c : t.columns)
                if (c.rfind("divisor_", 0) == 0) div = std::max(div, rel_drift(t.column(c)));
            const auto f1 = t.column("futaki_1"), f2 = t.column("futaki_2");
            const double f0 = std::hypot(f1.front(), f2.front());
            double fd = 0;
            for (std::size_t i = 0; i < f1.size(); ++i)
                fd = std::max(fd, std::hypot(f1[i] - f1.front(), f2[i] - f2.front()));
            fut_norm = std::hypot(f1.back(), f2.back());
            const bool fut_rel = f0 > 1e-3;
            os << "conservation drifts: volume " << pct(vol) << ", divisor areas " << pct(div) << ", Futaki "
               << (fut_rel ? pct(fd / f0) : num(fd) + " (absolute)") << '\n';
            const auto mr = t.column("mean_R");
            double mr_err = 0;
            for (double v : mr) mr_err = std::max(mr_err, std::abs(v - 2));
            const auto rm = t.column("sup_rm");
            const double rm_ratio = max_of(rm) / rm.front();
            os << "Futaki: (" << num(f1.back()) << ", " << num(f2.back()) << ")"
               << (fut_norm <= 1e-3 ? "  Futaki ≈ 0" : "  Futaki ≠ 0") << '\n';
            os << "checks:\n";
            check("volume drift <= 0.5%", vol <= 5e-3, pct(vol));
            check("divisor area drift <= 0.5%", div <= 5e-3, pct(div));
            check("Futaki drift <= 1%", fut_rel ? fd / f0 <= 1e-2 : fd <= 1e-5,
                  fut_rel ? pct(fd / f0) : num(fd) + " absolute");
            check("mean R = 2 +- 1e-2", mr_err <= 1e-2, "max |mean R - 2| = " + num(mr_err));
            check("kappa_min(t) >= 0.5 kappa_min(0)", min_of(kap) >= 0.5 * kap.front(),
                  "ratio " + num(min_of(kap) / kap.front()));
            check("sup|Rm|(t) <= 10 sup|Rm|(0)", rm_ratio <= 10, "ratio " + num(rm_ratio));
            check("Perelman quantities finite", std::isfinite(D), "D = " + num(D));
        }
    } else {
        os << "diagnostics.csv: missing\n";
    }
    if (has_cert) {
        std::ifstream in(dir / "certificate.json");
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) {
            os << "certificate.json: unreadable\n";
        } else {
            os << "endpoint verdict: " << j.value("verdict", std::string("?")) << '\n';
            const auto& co = j["projection"]["coefficients"];
            os << "soliton vector coefficients: (" << num(co[1].get<double>()) << ", " << num(co[2].get<double>())
               << ")\n";
            const double ratio = j.value("soliton_residual_ratio", NAN);
            if (j.contains("decay")) os << "decay rate alpha: " << num(j["decay"].value("alpha", NAN)) << '\n';
            if (j.contains("lambda1") && j["lambda1"].is_number())
                os << "lambda1 at t_end: " << num(j["lambda1"].get<double>()) << '\n';
            check("soliton residual(t_end) <= 1e-3 x initial", ratio <= 1e-3, "ratio " + num(ratio));
        }
    } else {
        os << "certificate.json: missing\n";
    }
    if (has_blow) {
        std::ifstream in(dir / "blowup.json");
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (!j.is_discarded())
            os << "blow-up event: t = " << num(j.value("t", NAN)) << ", x = (" << num(j["x"][0].get<double>())
               << ", " << num(j["x"][1].get<double>()) << "), Q = " << num(j.value("Q", NAN))
               << ", rescaled |Rm| at peak = " << num(j.value("rescaled_rm_at_peak", NAN)) << '\n';
    } else {
        os << "blow-up events: none\n";
    }
    return os.str();
}

int command_presets(std::ostream& out) {
    out << catalog_json().dump(2) << '\n';
    return kExitOk;
}

int command_eh_reference(std::ostream& out, double a, const std::vector<double>& radii) {
    out << eh_json(eguchi_hanson_reference(a, radii)).dump(2) << '\n';
    return kExitOk;
}

int command_lattice_search(const std::string& name, long bound, std::ostream& out, std::ostream& err) {
    try {
        if (bound < 1) throw ConfigError("bound must be >= 1");
        const FanoPreset& p = preset(name);
        const auto v = minus_two_class_search(p.intersection_form, bound);
        nlohmann::json j = {{"preset", name}, {"bound", bound}, {"form", p.intersection_form.matrix}};
        j["result"] = v ? nlohmann::json(*v) : nlohmann::json("none");
        out << j.dump(2) << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace toricflow
