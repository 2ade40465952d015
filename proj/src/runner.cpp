#include "otesim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>

#include <json.hpp>

#include "otesim/units.hpp"

namespace otesim::cli {

namespace {

using nlohmann::json;

json complex_pair(std::complex<double> c) { return json::array({c.real(), c.imag()}); }

json density_matrix_json(const atoms::Mat6& rho) {
    json rows = json::array();
    for (int i = 0; i < 6; ++i) {
        json row = json::array();
        for (int jx = 0; jx < 6; ++jx) row.push_back(complex_pair(rho(i, jx)));
        rows.push_back(row);
    }
    return json{{"basis", {"g0", "g1", "g2", "e0", "e1", "e2"}},
                {"layout", "row-major [re, im] pairs"},
                {"data", rows}};
}

json extended_temp_json(const thermo::ExtendedTemp& t) {
    json j{{"neg_inv_theta", t.neg_inv}, {"infinite", t.infinite}};
    if (t.infinite)
        j["theta"] = nullptr;
    else {
        j["theta"] = t.theta;
        j["theta_kelvin"] = units::to_kelvin(t.theta);
    }
    return j;
}

json rates_json(const env::RateSet& rs) {
    json channels = json::object();
    for (env::Channel c : env::local_channels) {
        const int i = static_cast<int>(c);
        channels[env::channel_name(c)] = {
            {"omega", rs.omega[i]},          {"gamma0", rs.gamma0[i]},
            {"gamma_plus", rs.gamma_plus[i]}, {"gamma_minus", rs.gamma_minus[i]},
            {"env_temp", rs.env_temp[i]},     {"env_temp_kelvin", units::to_kelvin(rs.env_temp[i])},
        };
    }
    channels["d"] = {
        {"omega", rs.omega_d},
        {"gamma0", rs.gamma0_d},
        {"gamma_plus", complex_pair(rs.gamma_d_plus)},
        {"gamma_minus", complex_pair(rs.gamma_d_minus)},
        {"env_temp", rs.t_d},
        {"env_temp_kelvin", units::to_kelvin(rs.t_d)},
        {"coherence_factor", rs.coherence_factor},
        {"non_hermitian_flag", rs.nonlocal_complex},
    };
    channels["lambda"] = rs.lambda;
    return channels;
}

json report_json(const thermo::FluxReport& rep) {
    return json{
        {"sign_convention", "positive = absorbed by atoms"},
        {"q_1", rep.q_1},
        {"q_2", rep.q_2},
        {"q_3", rep.q_3},
        {"q_b", rep.q_b},
        {"q_d_machine_side", rep.q_d_machine},
        {"q_d_body_side", rep.q_d_body},
        {"q_d_total", rep.q_d_total},
        {"q_r", rep.q_r},
        {"first_law_residual", rep.first_law_residual},
        {"entropy_flux_form", rep.entropy_flux_form},
        {"entropy_kernel_form", rep.entropy_kernel_form},
        {"entropy_skipped", rep.entropy_skipped},
        {"theta_1", extended_temp_json(rep.theta_1)},
        {"theta_2", extended_temp_json(rep.theta_2)},
        {"theta_3", extended_temp_json(rep.theta_3)},
        {"theta_b", extended_temp_json(rep.theta_b)},
        {"c_r", complex_pair(rep.c_r)},
        {"discord_proxy", rep.discord_proxy},
        {"p_g", rep.p_g},
        {"p_e", rep.p_e},
        {"balance",
         {{"predicted_ratio", rep.balance.predicted_ratio},
          {"measured_ratio", rep.balance.measured_ratio},
          {"delta", rep.balance.delta_term}}},
        {"audit",
         {{"q_m", rep.audit.q_m}, {"w_m", rep.audit.w_m}, {"h_eff_norm", rep.audit.h_eff_norm}}},
    };
}

void write_text(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("output: cannot open '" + path + "'");
    out << content;
}

struct Pipeline {
    env::RateSet rates;
    dyn::Liouvillian liouvillian;
    dyn::StationaryState state;
    thermo::FluxReport report;
    analysis::TaskClass task;
};

Pipeline run_pipeline(const RunConfig& cfg) {
    Pipeline p;
    p.rates = env::rates(cfg.environment, cfg.system);
    p.liouvillian = dyn::assemble(cfg.system, p.rates);
    p.state = dyn::steady_state(p.liouvillian, cfg.system, cfg.solver);
    p.report = thermo::analyze(cfg.system, p.rates, p.liouvillian, p.state);
    p.task = analysis::classify(p.report, cfg.environment.t_w, cfg.environment.t_s,
                                p.rates.env_temp[static_cast<int>(env::Channel::Body)]);
    return p;
}

json units_json() {
    return json{{"omega_s_rad_per_s", units::omega_s_si},
                {"kelvin_per_temperature_unit", units::kelvin_per_unit},
                {"note", "frequencies in units of omega_S; hbar = k_B = 1"}};
}

std::string sanitize_for_csv(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

// Decile progress lines on the diagnostic stream.
analysis::ProgressFn decile_progress(std::ostream& diag) {
    auto mtx = std::make_shared<std::mutex>();
    return [&diag, mtx](std::size_t done, std::size_t total) {
        if (total < 10 || done * 10 / total != (done - 1) * 10 / total) {
            std::lock_guard<std::mutex> lock(*mtx);
            diag << "progress " << done << "/" << total << "\n";
        }
    };
}

}  // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int run_steady(const RunConfig& cfg, std::ostream& diag) {
    try {
        const Pipeline p = run_pipeline(cfg);
        json out{
            {"schema_version", schema_version},
            {"units", units_json()},
            {"rates", rates_json(p.rates)},
            {"state",
             {{"rho", density_matrix_json(p.state.rho)},
              {"populations", p.state.populations},
              {"c_r", complex_pair(p.state.c_r)},
              {"residual", p.state.residual},
              {"max_offresonant_coherence", p.state.max_offresonant_coherence}}},
            {"report", report_json(p.report)},
            {"task",
             {{"label", analysis::label_name(p.task.label)},
              {"theta_b", p.task.theta_b},
              {"t_b", p.task.t_b},
              {"margin", p.task.margin}}},
        };
        write_text(cfg.output_path, out.dump(2) + "\n");
        return exit_ok;
    } catch (const ConfigError& e) {
        diag << json{{"error", "config"}, {"what", e.what()}}.dump() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        diag << json{{"error", "solver"}, {"what", e.what()}}.dump() << "\n";
        return exit_solver_error;
    }
}

int run_validate(const RunConfig& cfg, std::ostream& diag) {
    json checks = json::array();
    std::string first_failure;
    auto record = [&](const std::string& name, bool pass, double value, double threshold,
                      bool skipped = false) {
        checks.push_back(json{{"name", name},
                              {"status", skipped ? "skip" : (pass ? "pass" : "fail")},
                              {"value", value},
                              {"threshold", threshold}});
        if (!skipped && !pass && first_failure.empty()) first_failure = name;
    };

    try {
        const Pipeline p = run_pipeline(cfg);
        const auto& rep = p.report;
        const auto& st = p.state;

        // Solver-quality contract: a tolerance looser than 1e-8 cannot
        // certify a stationary state, so the residual check rejects it.
        const bool tol_sane = cfg.solver.tolerance <= 1e-8;
        record("residual", tol_sane && st.residual <= cfg.solver.tolerance, st.residual,
               tol_sane ? cfg.solver.tolerance : 1e-8);

        const double trace_err = std::abs(st.rho.trace().real() - 1.0);
        record("unit-trace", trace_err < 1e-12, trace_err, 1e-12);
        record("positivity", st.min_eigenvalue >= -1e-10, st.min_eigenvalue, -1e-10);

        const bool quiescent = rep.max_flux_abs < 1e-12;
        record("first-law", quiescent || rep.first_law_residual <= 1e-10 * rep.max_flux_abs,
               rep.first_law_residual, 1e-10 * rep.max_flux_abs);

        if (rep.entropy_skipped) {
            record("second-law", true, 0.0, 0.0, /*skipped=*/true);
        } else {
            double abs_sum = 0.0;
            for (env::Channel c : env::local_channels) {
                const int i = static_cast<int>(c);
                if (p.rates.gamma_plus[i] > 0.0) {
                    const double q = i == 3 ? rep.q_b
                                            : (i == 0 ? rep.q_1 : (i == 1 ? rep.q_2 : rep.q_3));
                    abs_sum += std::abs(q / p.rates.env_temp[i]);
                }
            }
            if (std::abs(p.rates.gamma_d_plus) > 0.0 && p.rates.t_d > 0.0)
                abs_sum += std::abs(rep.q_d_total / p.rates.t_d);
            record("second-law", rep.entropy_flux_form <= 1e-12 * std::max(abs_sum, 1e-300),
                   rep.entropy_flux_form, 1e-12 * abs_sum);
        }

        record("x-structure", st.max_offresonant_coherence < 1e-8,
               st.max_offresonant_coherence, 1e-8);

        const Eigen::Matrix3cd rho_m = thermo::machine_marginal(st.rho);
        const Eigen::Matrix2cd rho_b = thermo::body_marginal(st.rho);
        double marg_offdiag = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int jx = 0; jx < 3; ++jx)
                if (i != jx) marg_offdiag = std::max(marg_offdiag, std::abs(rho_m(i, jx)));
        marg_offdiag = std::max(marg_offdiag, std::abs(rho_b(0, 1)));
        record("marginal-diagonality", marg_offdiag < 1e-8, marg_offdiag, 1e-8);

        // The closed-form balance coefficients assume real non-local rates;
        // flagged configurations skip the closure check like the second law.
        const double bal_err = std::abs(rep.balance.predicted_ratio - rep.balance.measured_ratio) /
                               std::max(std::abs(rep.balance.measured_ratio), 1e-300);
        record("balance-relation", bal_err < 1e-8, bal_err, 1e-8,
               /*skipped=*/p.rates.nonlocal_complex);

        const double q_gap = std::abs(rep.audit.q_m - rep.q_r);
        record("resonant-audit", q_gap <= 1e-12 * std::max(1.0, std::abs(rep.q_r)), q_gap,
               1e-12);

        json out{{"schema_version", schema_version},
                 {"checks", checks},
                 {"all_passed", first_failure.empty()}};
        write_text(cfg.output_path, out.dump(2) + "\n");
        if (!first_failure.empty()) {
            diag << json{{"error", "validation"}, {"first_failing", first_failure}}.dump() << "\n";
            return exit_validation_failed;
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        diag << json{{"error", "config"}, {"what", e.what()}}.dump() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        diag << json{{"error", "solver"}, {"what", e.what()}}.dump() << "\n";
        return exit_solver_error;
    }
}

int run_scan(const RunConfig& cfg, std::ostream& diag, int workers) {
    try {
        analysis::ScanGrid grid;
        grid.z_values.resize(cfg.scan.z_points);
        for (int i = 0; i < cfg.scan.z_points; ++i) {
            const double u = cfg.scan.z_points == 1
                                 ? 0.0
                                 : static_cast<double>(i) / (cfg.scan.z_points - 1);
            grid.z_values[i] = cfg.scan.log_z
                                   ? cfg.scan.z_min_um *
                                         std::pow(cfg.scan.z_max_um / cfg.scan.z_min_um, u)
                                   : cfg.scan.z_min_um + (cfg.scan.z_max_um - cfg.scan.z_min_um) * u;
        }
        grid.dt_kelvin_values.resize(cfg.scan.dt_points);
        for (int i = 0; i < cfg.scan.dt_points; ++i) {
            const double u = cfg.scan.dt_points == 1
                                 ? 0.0
                                 : static_cast<double>(i) / (cfg.scan.dt_points - 1);
            grid.dt_kelvin_values[i] =
                cfg.scan.dt_kelvin_min + (cfg.scan.dt_kelvin_max - cfg.scan.dt_kelvin_min) * u;
        }

        const analysis::PhaseScanResult res = analysis::scan_phase_diagram(
            cfg.system, cfg.environment, grid, cfg.solver, workers, decile_progress(diag));

        std::ostringstream csv;
        csv << "z,dT,label,theta_b,t_b\n";
        for (const auto& cell : res.cells) {
            csv << fmt_double(cell.z) << ',' << fmt_double(cell.dt_kelvin) << ',';
            if (cell.ok)
                csv << analysis::label_name(cell.label) << ',' << fmt_double(cell.theta_b) << ','
                    << fmt_double(cell.t_b) << '\n';
            else
                csv << "Error:" << sanitize_for_csv(cell.error) << ",nan,nan\n";
        }
        write_text(cfg.output_path, csv.str());

        diag << json{{"cells", res.cells.size()},
                     {"failed", res.n_failed},
                     {"first_law_violations", res.first_law_violations}}
                    .dump()
             << "\n";
        const double ok_fraction =
            1.0 - static_cast<double>(res.n_failed) / static_cast<double>(res.cells.size());
        return ok_fraction >= 0.9 ? exit_ok : exit_too_many_cell_errors;
    } catch (const ConfigError& e) {
        diag << json{{"error", "config"}, {"what", e.what()}}.dump() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        diag << json{{"error", "solver"}, {"what", e.what()}}.dump() << "\n";
        return exit_solver_error;
    }
}

int run_sample(const RunConfig& cfg, std::ostream& diag, int workers) {
    try {
        analysis::PowerSearchConfig search;
        search.omega2 = cfg.sample.omega2;
        search.omega1_max = cfg.sample.omega1_max;
        search.coarse_points = cfg.sample.coarse_points;
        search.dipole1 = cfg.dipole1;
        search.dipole2 = cfg.dipole2;
        search.dipole3 = cfg.dipole3;
        search.dipole_body = cfg.dipole_body;
        search.geometry = cfg.system.geometry;
        search.solver = cfg.solver;

        const analysis::SampleResult res =
            analysis::sample_machines(cfg.sample.n, cfg.sample.ranges, cfg.sample.seed,
                                      cfg.environment, search, workers, decile_progress(diag));

        std::ostringstream csv;
        csv << "bin_lo,bin_hi,count\n";
        for (int b = 0; b < 50; ++b)
            csv << fmt_double(b / 50.0) << ',' << fmt_double((b + 1) / 50.0) << ','
                << res.histogram[b] << '\n';
        write_text(cfg.output_path, csv.str());

        json summary{{"schema_version", schema_version},
                     {"n_total", res.n_total},
                     {"n_accepted", res.n_accepted},
                     {"n_no_refrigeration_window", res.n_no_window},
                     {"n_not_refrigerating", res.n_not_refrigerating},
                     {"n_ordering_violation", res.n_ordering_violation},
                     {"n_qd_condition_flagged", res.n_qd_flagged},
                     {"n_solver_failed", res.n_solver_failed},
                     {"ratio_quantiles", {{"q05", res.q05}, {"q50", res.q50}, {"q95", res.q95}}},
                     {"seed", cfg.sample.seed}};
        if (cfg.output_path == "-")
            std::cout << summary.dump(2) << "\n";
        else
            write_text(cfg.output_path + ".summary.json", summary.dump(2) + "\n");

        if (!cfg.sample.trace_path.empty()) {
            // Optimizer trace for the first draw's configuration.
            std::mt19937_64 rng(cfg.sample.seed);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            const double z =
                cfg.sample.ranges.z_min + (cfg.sample.ranges.z_max - cfg.sample.ranges.z_min) * u01(rng);
            const double t_w_k = cfg.sample.ranges.t_w_min_k +
                                 (cfg.sample.ranges.t_w_max_k - cfg.sample.ranges.t_w_min_k) * u01(rng);
            const double t_s_k = t_w_k + cfg.sample.ranges.t_s_span_k * u01(rng);
            env::EnvironmentModel model = cfg.environment;
            model.t_w = units::from_kelvin(t_w_k);
            model.t_s = units::from_kelvin(t_s_k);
            analysis::PowerSearchConfig tcfg = search;
            tcfg.geometry = atoms::Geometry(z, search.geometry.r);
            std::ostringstream trace;
            trace << "omega1,q_r,eta,eta_c\n";
            try {
                const analysis::PowerOptimum opt = analysis::maximize_power(model, tcfg);
                for (const auto& pt : opt.trace)
                    trace << fmt_double(pt.omega1) << ',' << fmt_double(pt.q_r) << ','
                          << fmt_double(pt.eta) << ',' << fmt_double(pt.eta_c) << '\n';
            } catch (const NoRefrigerationWindow&) {
            }
            write_text(cfg.sample.trace_path, trace.str());
        }

        diag << json{{"accepted", res.n_accepted}, {"total", res.n_total}}.dump() << "\n";
        const double ok_fraction =
            1.0 - static_cast<double>(res.n_solver_failed) / static_cast<double>(res.n_total);
        return ok_fraction >= 0.9 ? exit_ok : exit_too_many_cell_errors;
    } catch (const ConfigError& e) {
        diag << json{{"error", "config"}, {"what", e.what()}}.dump() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        diag << json{{"error", "solver"}, {"what", e.what()}}.dump() << "\n";
        return exit_solver_error;
    }
}

int run_evolve(const RunConfig& cfg, std::ostream& diag) {
    try {
        const env::RateSet rs = env::rates(cfg.environment, cfg.system);
        const dyn::Liouvillian l = dyn::assemble(cfg.system, rs);

        atoms::Mat6 rho = cfg.evolve.initial == "ground"
                              ? [] {
                                    atoms::Mat6 m = atoms::Mat6::Zero();
                                    m(0, 0) = 1.0;
                                    return m;
                                }()
                              : atoms::Mat6(atoms::Mat6::Identity() / 6.0);

        const double t_final = cfg.evolve.t_final.value_or(dyn::default_t_final(rs));
        const double dt = cfg.evolve.dt.value_or(0.05 / dyn::generator_norm(l));

        std::ostringstream traj;
        const bool want_traj = !cfg.evolve.trajectory_path.empty();
        if (want_traj) {
            traj << "t,p_g0,p_g1,p_g2,p_e0,p_e1,p_e2,re_c_r,im_c_r\n";
            const int points = std::max(cfg.evolve.trajectory_points, 2);
            double t = 0.0;
            atoms::Mat6 current = rho;
            const double chunk = t_final / (points - 1);
            for (int i = 0; i < points; ++i) {
                const std::complex<double> c_r = dyn::resonant_coherence(current, cfg.system);
                traj << fmt_double(t);
                for (int k = 0; k < 6; ++k) traj << ',' << fmt_double(current(k, k).real());
                traj << ',' << fmt_double(c_r.real()) << ',' << fmt_double(c_r.imag()) << '\n';
                if (i + 1 < points) {
                    current = dyn::time_evolve(l, current, chunk, dt);
                    t += chunk;
                }
            }
            rho = current;
        } else {
            rho = dyn::time_evolve(l, rho, t_final, dt);
        }

        json out{{"schema_version", schema_version},
                 {"units", units_json()},
                 {"t_final", t_final},
                 {"dt", dt},
                 {"rho", density_matrix_json(rho)},
                 {"trace", rho.trace().real()}};
        write_text(cfg.output_path, out.dump(2) + "\n");
        if (want_traj) write_text(cfg.evolve.trajectory_path, traj.str());
        return exit_ok;
    } catch (const ConfigError& e) {
        diag << json{{"error", "config"}, {"what", e.what()}}.dump() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        diag << json{{"error", "solver"}, {"what", e.what()}}.dump() << "\n";
        return exit_solver_error;
    }
}

}  // namespace otesim::cli
