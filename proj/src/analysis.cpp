#include "otesim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "otesim/parallel.hpp"
#include "otesim/units.hpp"

namespace otesim::analysis {

namespace {

using env::Channel;

struct PointEval {
    bool ok{false};
    std::string error;
    double q_r{std::numeric_limits<double>::quiet_NaN()};
    double q_r_scale{0.0};  // 2 omega_B |Lambda|, the natural magnitude of q_r
    double eta{std::numeric_limits<double>::quiet_NaN()};
    double eta_c{std::numeric_limits<double>::quiet_NaN()};
    CarnotBranch branch{CarnotBranch::TdAboveT2};
    bool eta_ok{false};
    bool carnot_ok{false};
    bool qd_negative{false};
    double discord{std::numeric_limits<double>::quiet_NaN()};
};

PointEval evaluate_machine(double omega1, const env::EnvironmentModel& model,
                           const PowerSearchConfig& cfg) {
    PointEval ev;
    try {
        const auto machine =
            atoms::MachineSpec::make(omega1, cfg.omega2, cfg.dipole1, cfg.dipole2, cfg.dipole3,
                                     atoms::MachineTransition::T2);
        const auto system = SystemSpec::make(machine, cfg.dipole_body, cfg.geometry);
        const env::RateSet rs = env::rates(model, system);
        const dyn::Liouvillian l = dyn::assemble(system, rs);
        const dyn::StationaryState st = dyn::steady_state(l, system, cfg.solver);
        const thermo::FluxReport rep = thermo::analyze(system, rs, l, st);
        ev.q_r = rep.q_r;
        ev.q_r_scale = 2.0 * system.omega_b() * std::abs(rs.lambda);
        ev.discord = rep.discord_proxy;
        ev.qd_negative = rep.q_d_machine < 0.0;
        try {
            ev.eta = efficiency_refrigeration(rep);
            ev.eta_ok = true;
        } catch (const NotRefrigerating&) {
        }
        try {
            const CarnotReport cr =
                carnot_bound(rs.env_temp[0], rs.env_temp[1], rs.env_temp[2], rs.t_d,
                             system.machine.omega1(), system.machine.omega2());
            ev.eta_c = cr.eta_c;
            ev.branch = cr.branch;
            ev.carnot_ok = true;
        } catch (const OrderingViolation&) {
        } catch (const DomainError&) {
        }
        ev.ok = true;
    } catch (const std::exception& e) {
        ev.error = e.what();
    }
    return ev;
}

double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

const char* label_name(TaskLabel label) {
    switch (label) {
        case TaskLabel::StrongCooling: return "StrongCooling";
        case TaskLabel::LightCooling: return "LightCooling";
        case TaskLabel::LightHeating: return "LightHeating";
        case TaskLabel::StrongHeating: return "StrongHeating";
        case TaskLabel::PopulationInversion: return "PopulationInversion";
        default: return "Idle";
    }
}

TaskClass classify(const thermo::FluxReport& report, double t_w, double t_s, double t_b,
                   double tol) {
    const double lo = std::min(t_w, t_s);
    const double hi = std::max(t_w, t_s);

    TaskClass tc;
    tc.t_b = t_b;
    if (report.p_e >= report.p_g) {
        tc.label = TaskLabel::PopulationInversion;
        tc.theta_b = report.theta_b.theta;  // infinite or negative
        tc.margin = std::numeric_limits<double>::quiet_NaN();
        return tc;
    }
    const double theta = report.theta_b.theta;
    tc.theta_b = theta;
    tc.margin = std::min(std::abs(theta - lo), std::abs(theta - hi));
    if (std::abs(theta - t_b) <= tol)
        tc.label = TaskLabel::Idle;
    else if (theta < t_b)
        tc.label = theta < lo - tol ? TaskLabel::StrongCooling : TaskLabel::LightCooling;
    else
        tc.label = theta > hi + tol ? TaskLabel::StrongHeating : TaskLabel::LightHeating;
    return tc;
}

double efficiency_refrigeration(const thermo::FluxReport& report) {
    if (!(report.q_r > 0.0))
        throw NotRefrigerating("efficiency_refrigeration: no heat extracted from the body");
    const double input = report.q_1 + report.q_2;
    if (!(input > 0.0))
        throw NotRefrigerating("efficiency_refrigeration: transitions 1 and 2 absorb no heat");
    return report.q_r / input;
}

CarnotReport carnot_bound(double t1, double t2, double t3, double td, double omega1,
                          double omega2) {
    if (!(t1 > 0.0) || !(t2 > 0.0) || !(t3 > 0.0) || !(td > 0.0))
        throw DomainError("carnot_bound: temperatures must be positive");
    if (!(omega1 > 0.0) || !(omega2 > 0.0))
        throw DomainError("carnot_bound: frequencies must be positive");
    // Refrigeration ordering: T_3 < T_2, T_d and T_2, T_d < T_1.
    if (!(t3 < t2) || !(t3 < td) || !(t2 < t1) || !(td < t1))
        throw OrderingViolation("carnot_bound: refrigeration temperature ordering violated");

    CarnotReport rep;
    if (td > t2) {
        rep.branch = CarnotBranch::TdAboveT2;
        const double half_ratio = omega2 / (2.0 * omega1);
        rep.eta_c = half_ratio + 0.5 * t2 * td * (t1 - t3) / (t1 * t3 * (td - t2)) +
                    half_ratio * t2 * (td - t3) / (t3 * (td - t2));
    } else {
        rep.branch = CarnotBranch::TdAtOrBelowT2;
        rep.eta_c = omega2 / omega1;
    }
    return rep;
}

PhaseScanResult scan_phase_diagram(const SystemSpec& base_system,
                                   const env::EnvironmentModel& base_env, const ScanGrid& grid,
                                   const dyn::SolverOptions& solver, int workers,
                                   const ProgressFn& progress) {
    const std::size_t nz = grid.z_values.size();
    const std::size_t nt = grid.dt_kelvin_values.size();
    PhaseScanResult result;
    result.cells.resize(nz * nt);
    std::vector<int> first_law_bad(nz * nt, 0);
    std::atomic<std::size_t> done{0};

    parallel_for(nz * nt, [&](std::size_t idx) {
        const std::size_t zi = idx / nt;
        const std::size_t ti = idx % nt;
        PhaseScanCell& cell = result.cells[idx];
        cell.z = grid.z_values[zi];
        cell.dt_kelvin = grid.dt_kelvin_values[ti];
        try {
            SystemSpec system = base_system;
            system.geometry = Geometry(cell.z, base_system.geometry.r);
            env::EnvironmentModel model = base_env;
            model.t_s = model.t_w - units::from_kelvin(cell.dt_kelvin);
            if (!(model.t_s > 0.0)) throw DomainError("scan: slab temperature not positive");
            const env::RateSet rs = env::rates(model, system);
            const dyn::Liouvillian l = dyn::assemble(system, rs);
            const dyn::StationaryState st = dyn::steady_state(l, system, solver);
            const thermo::FluxReport rep = thermo::analyze(system, rs, l, st);
            if (rep.max_flux_abs >= 1e-12 &&
                rep.first_law_residual > 1e-10 * rep.max_flux_abs)
                first_law_bad[idx] = 1;
            const TaskClass tc = classify(rep, model.t_w, model.t_s,
                                          rs.env_temp[static_cast<int>(Channel::Body)]);
            cell.label = tc.label;
            cell.theta_b = tc.theta_b;
            cell.t_b = tc.t_b;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        if (progress) progress(done.fetch_add(1) + 1, nz * nt);
    }, workers);

    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        if (!result.cells[i].ok) ++result.n_failed;
        result.first_law_violations += first_law_bad[i];
    }
    return result;
}

PowerOptimum maximize_power(const env::EnvironmentModel& env_model,
                            const PowerSearchConfig& cfg) {
    if (!(cfg.omega2 > 0.0) || !(cfg.omega1_max > cfg.omega2))
        throw DomainError("maximize_power: need omega1_max > omega2 > 0");
    const int n = std::max(cfg.coarse_points, 4);
    const double window = cfg.omega1_max - cfg.omega2;

    std::map<double, PointEval> cache;
    auto eval = [&](double w1) -> const PointEval& {
        auto it = cache.find(w1);
        if (it == cache.end()) it = cache.emplace(w1, evaluate_machine(w1, env_model, cfg)).first;
        return it->second;
    };

    // Coarse pass over interior points of (omega2, omega1_max).
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i)
        grid[i] = cfg.omega2 + window * static_cast<double>(i + 1) / static_cast<double>(n + 1);
    int best = -1;
    for (int i = 0; i < n; ++i) {
        const PointEval& ev = eval(grid[i]);
        if (!ev.ok || std::isnan(ev.q_r)) continue;
        if (best < 0 || ev.q_r > cache[grid[best]].q_r) best = i;  // strict: leftmost tie wins
    }
    // Positive means above solver noise in Im(c_r): q_r = 2 w_B Lambda Im(c_r).
    if (best < 0 ||
        !(cache[grid[best]].q_r > 1e-12 * cache[grid[best]].q_r_scale))
        throw NoRefrigerationWindow("maximize_power: no omega1 yields positive resonant flux");

    // Golden-section refinement in the bracket around the coarse maximiser.
    double lo = grid[std::max(best - 1, 0)];
    double hi = grid[std::min(best + 1, n - 1)];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double tol = cfg.golden_rel_tol * window;
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    int guard = 0;
    while (hi - lo > tol && guard++ < 200) {
        const double fc = eval(c).ok ? eval(c).q_r : -std::numeric_limits<double>::infinity();
        const double fd = eval(d).ok ? eval(d).q_r : -std::numeric_limits<double>::infinity();
        if (fc >= fd) {  // ties move left
            hi = d;
            d = c;
            c = hi - invphi * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + invphi * (hi - lo);
        }
    }

    // Winner over everything evaluated; leftmost on exact ties.
    double best_w1 = 0.0;
    double best_qr = -std::numeric_limits<double>::infinity();
    double best_scale = 0.0;
    for (const auto& [w1, ev] : cache) {
        if (!ev.ok || std::isnan(ev.q_r)) continue;
        if (ev.q_r > best_qr) {
            best_qr = ev.q_r;
            best_w1 = w1;
            best_scale = ev.q_r_scale;
        }
    }
    if (!(best_qr > 1e-12 * best_scale))
        throw NoRefrigerationWindow("maximize_power: refinement lost the refrigeration window");

    const PointEval& top = cache[best_w1];
    PowerOptimum opt;
    opt.omega1 = best_w1;
    opt.omega3 = best_w1 + cfg.omega2;
    opt.q_r_max = best_qr;
    opt.eta_available = top.eta_ok;
    opt.carnot_available = top.carnot_ok;
    opt.qd_negative = top.qd_negative;
    opt.carnot.eta = top.eta;
    opt.carnot.eta_c = top.eta_c;
    opt.carnot.branch = top.branch;
    opt.carnot.ratio = (top.eta_ok && top.carnot_ok) ? top.eta / top.eta_c
                                                     : std::numeric_limits<double>::quiet_NaN();

    std::vector<double> discords, powers;
    opt.trace.reserve(cache.size());
    for (const auto& [w1, ev] : cache) {
        PowerTracePoint pt;
        pt.omega1 = w1;
        pt.q_r = ev.q_r;
        pt.eta = ev.eta;
        pt.eta_c = ev.eta_c;
        pt.discord = ev.discord;
        opt.trace.push_back(pt);
        if (ev.ok && !std::isnan(ev.q_r) && !std::isnan(ev.discord)) {
            powers.push_back(ev.q_r);
            discords.push_back(ev.discord);
        }
    }
    opt.spearman_discord_power = spearman(discords, powers);
    return opt;
}

SampleResult sample_machines(int n, const SampleRanges& ranges, std::uint64_t seed,
                             const env::EnvironmentModel& base_env,
                             const PowerSearchConfig& base_config, int workers,
                             const ProgressFn& progress) {
    if (n < 1) throw DomainError("sample_machines: n must be >= 1");

    struct Draw {
        double z, t_w, t_s;  // natural units
    };
    std::vector<Draw> draws(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (auto& d : draws) {
        // Sequential pre-draw keeps the study deterministic under any
        // worker count.
        d.z = ranges.z_min + (ranges.z_max - ranges.z_min) * u01(rng);
        const double t_w_k = ranges.t_w_min_k + (ranges.t_w_max_k - ranges.t_w_min_k) * u01(rng);
        const double span = ranges.t_s_span_k * u01(rng);
        d.t_w = units::from_kelvin(t_w_k);
        d.t_s = units::from_kelvin(t_w_k + span);
    }

    struct Outcome {
        int kind{0};  // 0 accepted, 1 no window, 2 not refrigerating,
                      // 3 ordering violation, 4 qd flagged, 5 solver failure
        double ratio{std::numeric_limits<double>::quiet_NaN()};
    };
    std::vector<Outcome> outcomes(n);
    std::atomic<std::size_t> done{0};

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        Outcome& out = outcomes[i];
        try {
            env::EnvironmentModel model = base_env;
            model.t_w = draws[i].t_w;
            model.t_s = draws[i].t_s;
            PowerSearchConfig cfg = base_config;
            cfg.geometry = Geometry(draws[i].z, base_config.geometry.r);
            const PowerOptimum opt = maximize_power(model, cfg);
            if (!opt.eta_available) {
                out.kind = 2;
            } else if (!opt.carnot_available) {
                out.kind = 3;
            } else if (opt.carnot.branch == CarnotBranch::TdAboveT2 && !opt.qd_negative) {
                // First-branch bound is derived under Q_d < 0 only.
                out.kind = 4;
            } else {
                out.kind = 0;
                out.ratio = opt.carnot.ratio;
            }
        } catch (const NoRefrigerationWindow&) {
            out.kind = 1;
        } catch (const std::exception&) {
            out.kind = 5;
        }
        if (progress) progress(done.fetch_add(1) + 1, static_cast<std::size_t>(n));
    }, workers);

    SampleResult res;
    res.n_total = n;
    for (const auto& out : outcomes) {
        switch (out.kind) {
            case 0: {
                ++res.n_accepted;
                res.ratios.push_back(out.ratio);
                const int bin =
                    std::clamp(static_cast<int>(std::floor(out.ratio * 50.0)), 0, 49);
                ++res.histogram[bin];
                break;
            }
            case 1: ++res.n_no_window; break;
            case 2: ++res.n_not_refrigerating; break;
            case 3: ++res.n_ordering_violation; break;
            case 4: ++res.n_qd_flagged; break;
            default: ++res.n_solver_failed; break;
        }
    }
    std::vector<double> sorted = res.ratios;
    std::sort(sorted.begin(), sorted.end());
    res.q05 = quantile(sorted, 0.05);
    res.q50 = quantile(sorted, 0.50);
    res.q95 = quantile(sorted, 0.95);
    return res;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) continue;
        xs.push_back(a[i]);
        ys.push_back(b[i]);
    }
    const std::size_t n = xs.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();

    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return v[i] < v[j];
        });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank on ties
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(xs);
    const std::vector<double> rb = ranks(ys);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cov / std::sqrt(va * vb);
}

}  // namespace otesim::analysis
