#include "toricflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "toricflow/errors.hpp"
#include "toricflow/snapshot.hpp"
#include "toricflow/soliton.hpp"

namespace toricflow {

namespace {

double sup_over_trusted(const MetricState& s, const Field& f) {
    double v = 0;
    const auto& T = s.trusted();
    for (std::size_t k = 0; k < s.grid().size(); ++k)
        if (T[k]) v = std::max(v, std::abs(f[k]));
    return v;
}

// Trusted nodes whose 5 x 5 neighbourhood is trusted.
Mask interior_of_trusted(const Discretization& d) {
    const Grid& G = d.grid();
    const auto& T = d.trusted();
    Mask m(G.size(), 0);
    for (int i = 2; i <= G.N - 2; ++i)
        for (int j = 2; j <= G.N - 2; ++j) {
            bool ok = true;
            for (int a = -2; a <= 2 && ok; ++a)
                for (int b = -2; b <= 2 && ok; ++b) ok = T[G.idx(i + a, j + b)] != 0;
            m[G.idx(i, j)] = ok;
        }
    return m;
}

}  // namespace

std::vector<std::size_t> kappa_centers(const Discretization& d) {
    const Grid& G = d.grid();
    const double q = 0.25 * G.L;
    const double pts[5][2] = {{0, 0}, {q, 0}, {-q, 0}, {0, q}, {0, -q}};
    std::vector<std::size_t> out;
    for (const auto& p : pts) {
        double best = INFINITY;
        std::size_t bk = 0;
        for (int i = 0; i <= G.N; ++i)
            for (int j = 0; j <= G.N; ++j) {
                const std::size_t k = G.idx(i, j);
                if (!d.trusted()[k]) continue;
                const double dd = std::hypot(G.x(i) - p[0], G.x(j) - p[1]);
                if (dd < best) {
                    best = dd;
                    bk = k;
                }
            }
        if (std::isfinite(best) && std::find(out.begin(), out.end(), bk) == out.end()) out.push_back(bk);
    }
    if (out.empty()) throw NumericError("no trusted node for ball centers");
    return out;
}

double kappa_min(const MetricState& s, const std::vector<double>& radii) {
    double m = INFINITY;
    for (auto c : kappa_centers(*s.disc))
        for (double r : radii) m = std::min(m, ball_volume_ratio(s, c, r));
    return m;
}

PerelmanReport perelman_monitor(const MetricState& s, const RicciPotential& h, const std::vector<double>& radii) {
    PerelmanReport r;
    r.sup_R = sup_over_trusted(s, s.R);
    r.mean_R = integrate(s, s.R) / volume(s);
    r.diameter = diameter_surrogate(s).surrogate;
    r.h_sup = h.sup_abs;
    const auto& T = s.trusted();
    for (std::size_t k = 0; k < s.grid().size(); ++k)
        if (T[k]) r.grad_h_sup = std::max(r.grad_h_sup, std::sqrt(2.0) * covector_norm(s, k, h.dh[0][k], h.dh[1][k]));
    r.kappa_min = kappa_min(s, radii);
    return r;
}

Field laplacian(const MetricState& s, const Field& f) {
    const auto& fd = s.disc->fd();
    const Field f11 = fd.diff(f, 2, 0), f12 = fd.diff(f, 1, 1), f22 = fd.diff(f, 0, 2);
    return s.ginv[0] * f11 + 2.0 * s.ginv[1] * f12 + s.ginv[2] * f22;
}

double evolution_residual(const MetricState& s0, const MetricState& s1, double dt, const std::array<double, 2>& v,
                          double core_tau) {
    if (!(dt > 0)) throw DomainError("evolution residual needs dt > 0");
    const auto& fd = s0.disc->fd();
    auto rhs = [&](const MetricState& s) {
        const Field R1 = fd.diff(s.R, 1, 0), R2 = fd.diff(s.R, 0, 1);
        return Field(laplacian(s, s.R) + s.ric2 - s.R - v[0] * R1 - v[1] * R2);
    };
    const Field a = rhs(s0), b = rhs(s1);
    const Mask m = interior_of_trusted(*s0.disc);
    double sup = 0;
    for (std::size_t k = 0; k < s0.grid().size(); ++k)
        if (m[k] && s0.disc->lambda_min0()[k] >= core_tau) sup = std::max(sup, std::abs((s1.R[k] - s0.R[k]) / dt - 0.5 * (a[k] + b[k])));
    return sup;
}

CurvatureEnergy curvature_energy(const MetricState& s) {
    return {integrate(s, s.rm2, &s.trusted()), integrate(s, s.R * s.R, &s.trusted())};
}

double phidot_oscillation(const MetricState& s, const PotentialField& p, const Field& h0) {
    const auto& res = s.disc->resolved();
    const std::size_t n = s.grid().size();
    Field r = Field::Zero(n);
    for (std::size_t k = 0; k < n; ++k)
        if (res[k]) r[k] = s.logdet[k] - s.disc->logdet0()[k] + p.phi[k] - h0[k];
    const double V = volume(s, &res);
    const double c = integrate(s, r, &res) / V;
    const Field d = (r - c).square();
    return std::sqrt(std::max(integrate(s, d, &res) / V, 0.0));
}

DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& osc) {
    DecayFit f;
    if (t.size() != osc.size()) throw DomainError("decay fit needs matching columns");
    if (t.size() < 10) {
        f.note = "fewer than 10 rows";
        return f;
    }
    const std::size_t start = t.size() / 2;
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double n = static_cast<double>(t.size() - start);
    for (std::size_t i = start; i < t.size(); ++i) {
        if (!(osc[i] > 0)) {
            f.note = "nonpositive oscillation";
            return f;
        }
        const double y = std::log(osc[i]);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
    }
    const double den = n * stt - st * st;
    if (!(den > 0)) {
        f.note = "degenerate time column";
        return f;
    }
    const double slope = (n * sty - st * sy) / den;
    const double icpt = (sy - slope * st) / n;
    double ss = 0;
    for (std::size_t i = start; i < t.size(); ++i) {
        const double e = std::log(osc[i]) - (icpt + slope * t[i]);
        ss += e * e;
    }
    f.ok = true;
    f.alpha = std::max(0.0, -slope);
    f.residual = std::sqrt(ss / n);
    return f;
}

DiagnosticsRow diagnostics_row(const MetricState& s, const PotentialField& p, const Field& h0, RowOptions opts) {
    DiagnosticsRow r;
    const RicciPotential rp = ricci_potential(s);
    const PerelmanReport pm = perelman_monitor(s, rp);
    r.sup_R = pm.sup_R;
    r.mean_R = pm.mean_R;
    r.diameter = pm.diameter;
    r.h_sup = pm.h_sup;
    r.grad_h_sup = pm.grad_h_sup;
    r.kappa_min = pm.kappa_min;
    const Field rm = s.rm2.max(0.0).sqrt();
    r.sup_rm = sup_over_trusted(s, rm);
    const CurvatureEnergy e = curvature_energy(s);
    r.rm_energy = e.rm;
    r.r_energy = e.R;
    r.volume = volume(s);
    if (s.disc->preset()) r.divisor_areas = divisor_areas(s);
    r.futaki = futaki(s, rp);
    r.soliton_residual = normalized_soliton_residual(s, rp);
    if (opts.lambda1) {
        const auto l = lambda1(s, opts.fourier_modes);
        r.lambda1 = l ? *l : std::nan("");
    }
    r.oscillation = phidot_oscillation(s, p, h0);
    return r;
}

std::vector<std::string> csv_columns(std::size_t divisors) {
    std::vector<std::string> c = {"t",      "sup_R",      "mean_R",    "diameter", "h_sup", "grad_h_sup",
                                  "kappa_min", "sup_rm", "rm_energy", "r_energy", "volume"};
    for (std::size_t i = 0; i < divisors; ++i) c.push_back("divisor_" + std::to_string(i + 1));
    for (const char* n : {"futaki_1", "futaki_2", "soliton_residual", "lambda1", "oscillation", "c_of_t",
                          "velocity_1", "velocity_2", "evolution_residual", "dt", "steps", "rejected"})
        c.push_back(n);
    return c;
}

void write_csv_header(std::ostream& os, std::size_t divisors) {
    const auto c = csv_columns(divisors);
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << '\n';
}

std::vector<double> row_values(const DiagnosticsRow& r) {
    std::vector<double> v = {r.t,         r.sup_R,  r.mean_R,    r.diameter, r.h_sup, r.grad_h_sup,
                             r.kappa_min, r.sup_rm, r.rm_energy, r.r_energy, r.volume};
    v.insert(v.end(), r.divisor_areas.begin(), r.divisor_areas.end());
    for (double x : {r.futaki[0], r.futaki[1], r.soliton_residual, r.lambda1, r.oscillation, r.c_of_t,
                     r.velocity[0], r.velocity[1], r.evolution_residual, r.dt, static_cast<double>(r.steps),
                     static_cast<double>(r.rejected)})
        v.push_back(x);
    return v;
}

void write_csv_row(std::ostream& os, const DiagnosticsRow& r) {
    const auto v = row_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << (std::isnan(v[i]) ? "nan" : format_double(v[i]));
    os << '\n';
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw DomainError("no column " + name);
    const std::size_t c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(c < r.size() ? r[c] : std::nan(""));
    return out;
}

bool CsvTable::has(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) return t;
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) row.push_back(std::strtod(c.c_str(), nullptr));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_plot_data(const std::string& dir, const CsvTable& table, const std::vector<std::string>& columns) {
    std::filesystem::create_directories(dir);
    const auto t = table.column("t");
    const auto& cols = columns.empty() ? table.columns : columns;
    for (const auto& c : cols) {
        if (c == "t") continue;
        const auto v = table.column(c);
        std::ofstream out(std::filesystem::path(dir) / (c + ".dat"));
        out << "# t " << c << '\n';
        for (std::size_t i = 0; i < t.size(); ++i)
            out << format_double(t[i]) << ' ' << (std::isnan(v[i]) ? "nan" : format_double(v[i])) << '\n';
    }
}

}  // namespace toricflow
