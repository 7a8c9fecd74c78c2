#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "toricflow/flow.hpp"

namespace toricflow {

struct PerelmanReport {
    double sup_R = 0;
    double mean_R = 0;
    double diameter = 0;
    double h_sup = 0;
    double grad_h_sup = 0;  // sup |dh|_g over the trusted set
    double kappa_min = 0;
};

// Ball centers for the noncollapsing ratio: trusted nodes nearest a fixed set of points.
std::vector<std::size_t> kappa_centers(const Discretization& d);
double kappa_min(const MetricState& s, const std::vector<double>& radii = {0.1, 0.3, 0.6, 0.9});
PerelmanReport perelman_monitor(const MetricState& s, const RicciPotential& h,
                                const std::vector<double>& radii = {0.1, 0.3, 0.6, 0.9});

// Complex Laplacian F^{jk} f_jk.
Field laplacian(const MetricState& s, const Field& f);

// sup over the core {lambda_min(F0) >= core_tau} of the trusted set of
// |(R1 - R0)/dt - (L R)(t + dt/2)| with L R = Delta R + |Ric|^2 - R - V.grad R;
// V is the gauge velocity of the step.
double evolution_residual(const MetricState& s0, const MetricState& s1, double dt,
                          const std::array<double, 2>& velocity = {0.0, 0.0}, double core_tau = 0.1);

// Integrals over the trusted set.
struct CurvatureEnergy {
    double rm = 0;  // int |Rm|^2 dV
    double R = 0;   // int R^2 dV
};
CurvatureEnergy curvature_energy(const MetricState& s);

// sqrt((1/V) int (phidot - c)^2 dV) on the resolved set, phidot the unnormalized flow speed.
double phidot_oscillation(const MetricState& s, const PotentialField& p, const Field& h0);

// Smallest nonzero eigenvalue of the complex Laplacian over torus modes |m|_inf <= M.
std::optional<double> lambda1(const MetricState& s, int max_mode = 2);

struct DecayFit {
    bool ok = false;
    double alpha = 0;
    double residual = 0;  // rms misfit of log oscillation
    std::string note;
};
// Least squares slope of log(osc) against t over the trailing half of the rows.
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& osc);

struct DiagnosticsRow {
    double t = 0;
    double sup_R = 0;
    double mean_R = 0;
    double diameter = 0;
    double h_sup = 0;
    double grad_h_sup = 0;
    double kappa_min = 0;
    double sup_rm = 0;
    double rm_energy = 0;
    double r_energy = 0;
    double volume = 0;
    std::vector<double> divisor_areas;
    std::array<double, 2> futaki{0.0, 0.0};
    double soliton_residual = 0;
    double lambda1 = std::nan("");
    double oscillation = 0;
    double c_of_t = 0;
    std::array<double, 2> velocity{0.0, 0.0};
    double evolution_residual = std::nan("");
    double dt = 0;
    long steps = 0;
    long rejected = 0;
};

struct RowOptions {
    bool lambda1 = false;
    int fourier_modes = 2;
};

DiagnosticsRow diagnostics_row(const MetricState& s, const PotentialField& p, const Field& h0,
                               RowOptions opts = {});

std::vector<std::string> csv_columns(std::size_t divisors);
void write_csv_header(std::ostream& os, std::size_t divisors);
void write_csv_row(std::ostream& os, const DiagnosticsRow& r);
std::vector<double> row_values(const DiagnosticsRow& r);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<double> column(const std::string& name) const;
    bool has(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

// One two-column (t, value) file per column, named <column>.dat.
void write_plot_data(const std::string& dir, const CsvTable& table,
                     const std::vector<std::string>& columns = {});

}  // namespace toricflow
