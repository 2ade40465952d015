// analysis.hpp — Task classification, efficiency bounds, phase scans,
// power maximisation and the random-machine sampling study.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "otesim/dynamics.hpp"
#include "otesim/environment.hpp"
#include "otesim/thermo.hpp"

namespace otesim::analysis {

using atoms::Geometry;
using atoms::SystemSpec;

enum class TaskLabel {
    StrongCooling,
    LightCooling,
    LightHeating,
    StrongHeating,
    PopulationInversion,
    Idle,
};

const char* label_name(TaskLabel label);

struct TaskClass {
    TaskLabel label{TaskLabel::Idle};
    double theta_b{0.0};
    double t_b{0.0};
    double margin{0.0};  // distance of theta_B from the nearest of {T_W, T_S};
                         // NaN under inversion where theta_B is not finite
};

// Strong tasks drive theta_B outside [min(T_W,T_S), max(T_W,T_S)], light
// tasks keep it inside; inversion wins whenever p_e >= p_g.
TaskClass classify(const thermo::FluxReport& report, double t_w, double t_s, double t_b,
                   double tol = 1e-9);

// eta_ref = Q_r / (Q_1 + Q_2); refrigeration only.
double efficiency_refrigeration(const thermo::FluxReport& report);

enum class CarnotBranch { TdAboveT2, TdAtOrBelowT2 };

struct CarnotReport {
    double eta{std::numeric_limits<double>::quiet_NaN()};
    double eta_c{0.0};
    CarnotBranch branch{CarnotBranch::TdAboveT2};
    double ratio{std::numeric_limits<double>::quiet_NaN()};
};

// Zero-entropy-production bound for refrigeration through transition 2.
// Requires the refrigeration ordering T_3 < T_2, T_d and T_2, T_d < T_1.
CarnotReport carnot_bound(double t1, double t2, double t3, double td, double omega1,
                          double omega2);

struct PhaseScanCell {
    double z{0.0};
    double dt_kelvin{0.0};  // T_W - T_S in kelvin
    bool ok{false};
    TaskLabel label{TaskLabel::Idle};
    double theta_b{0.0};
    double t_b{0.0};
    std::string error;
};

struct PhaseScanResult {
    std::vector<PhaseScanCell> cells;  // row-major over (z, dT)
    std::size_t n_failed{0};
    std::size_t first_law_violations{0};
};

struct ScanGrid {
    std::vector<double> z_values;          // um
    std::vector<double> dt_kelvin_values;  // T_W - T_S, kelvin
};

// Called after each finished cell/draw with (done, total); may run on any
// worker thread.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

// Rebuilds rates -> steady state -> classification cell by cell; per-cell
// errors are recorded in place and the scan continues.
PhaseScanResult scan_phase_diagram(const SystemSpec& base_system,
                                   const env::EnvironmentModel& base_env, const ScanGrid& grid,
                                   const dyn::SolverOptions& solver = {}, int workers = 0,
                                   const ProgressFn& progress = {});

struct PowerTracePoint {
    double omega1{0.0};
    double q_r{std::numeric_limits<double>::quiet_NaN()};
    double eta{std::numeric_limits<double>::quiet_NaN()};
    double eta_c{std::numeric_limits<double>::quiet_NaN()};
    double discord{std::numeric_limits<double>::quiet_NaN()};
};

struct PowerOptimum {
    double omega1{0.0};
    double omega3{0.0};
    double q_r_max{0.0};
    CarnotReport carnot;
    bool eta_available{false};
    bool carnot_available{false};
    bool qd_negative{false};  // validity condition of the first-branch bound
    std::vector<PowerTracePoint> trace;  // every evaluated point, ascending omega1
    double spearman_discord_power{std::numeric_limits<double>::quiet_NaN()};
};

struct PowerSearchConfig {
    double omega2{0.1};  // = omega_B, resonance through transition 2
    double omega1_max{1.0};
    double dipole1{1.0}, dipole2{1.0}, dipole3{1.0}, dipole_body{1.0};
    Geometry geometry{1.0, 1.0};
    int coarse_points{64};
    double golden_rel_tol{1e-4};
    dyn::SolverOptions solver{};
};

// Grid search over omega1 in (omega2, omega1_max) with omega3 = omega1 +
// omega2, golden-section refinement after the coarse pass. Ties resolve to
// the leftmost maximiser.
PowerOptimum maximize_power(const env::EnvironmentModel& env_model,
                            const PowerSearchConfig& config);

struct SampleRanges {
    double z_min{0.9}, z_max{100.0};          // um
    double t_w_min_k{50.0}, t_w_max_k{500.0};  // kelvin
    double t_s_span_k{500.0};                  // T_S uniform in [T_W, T_W + span]
};

struct SampleResult {
    int n_total{0};
    int n_accepted{0};
    int n_no_window{0};
    int n_not_refrigerating{0};
    int n_ordering_violation{0};
    int n_qd_flagged{0};
    int n_solver_failed{0};
    std::array<std::int64_t, 50> histogram{};  // eta_m/eta_c binned over [0,1]
    std::vector<double> ratios;                // accepted ratios, draw order
    double q05{0.0}, q50{0.0}, q95{0.0};
};

// Seeded random-machine study: draws (z, T_W, T_S), maximises power per
// draw, bins eta_m/eta_C. Deterministic for a fixed seed.
SampleResult sample_machines(int n, const SampleRanges& ranges, std::uint64_t seed,
                             const env::EnvironmentModel& base_env,
                             const PowerSearchConfig& base_config, int workers = 0,
                             const ProgressFn& progress = {});

// Rank correlation with average ranks on ties; NaN pairs are skipped.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace otesim::analysis
