#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace otesim;
using atoms::Mat6;

namespace {

thermo::FluxReport full_report(const testsupport::SolvedConfig& sol) {
    return thermo::analyze(sol.config.system, sol.rates, sol.liouvillian, sol.state);
}

}  // namespace

TEST_CASE("population temperature on the extended line") {
    const auto unit = thermo::population_temperature(std::exp(1.0), 1.0, 1.0);
    CHECK(unit.theta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(unit.infinite);

    const auto flat = thermo::population_temperature(0.25, 0.25, 0.7);
    CHECK(flat.infinite);
    CHECK(flat.neg_inv == 0.0);

    const auto inverted = thermo::population_temperature(0.2, 0.5, 0.7);
    CHECK(inverted.theta < 0.0);
    CHECK(inverted.neg_inv > 0.0);

    CHECK_THROWS_AS(thermo::population_temperature(-1e-3, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(thermo::population_temperature(0.0, 0.0, 1.0), DomainError);
}

TEST_CASE("equilibrium: all fluxes vanish and entropy forms are zero") {
    std::mt19937_64 rng(31);
    auto sol = testsupport::solve(testsupport::draw_generic(rng, /*equilibrium=*/true));
    const auto rep = full_report(sol);
    CHECK(std::abs(rep.q_1) < 1e-12);
    CHECK(std::abs(rep.q_2) < 1e-12);
    CHECK(std::abs(rep.q_3) < 1e-12);
    CHECK(std::abs(rep.q_b) < 1e-12);
    CHECK(std::abs(rep.q_d_total) < 1e-12);
    CHECK(std::abs(rep.entropy_flux_form) < 1e-12);
    CHECK(std::abs(rep.entropy_kernel_form) < 1e-12);
    // theta_n = T_n = T at equilibrium
    CHECK(rep.theta_b.theta == doctest::Approx(sol.config.model.t_w).epsilon(1e-11));
    CHECK(rep.theta_1.theta == doctest::Approx(sol.config.model.t_w).epsilon(1e-11));
}

TEST_CASE("body alone thermalises at its environmental temperature") {
    std::mt19937_64 rng(32);
    auto cfg = testsupport::draw_generic(rng);
    cfg.model.lambda_rule = env::LambdaRule::constant(0.0);
    auto rs = env::rates(cfg.model, cfg.system);
    rs.gamma_d_plus = rs.gamma_d_minus = 0.0;
    const dyn::Liouvillian l = dyn::assemble(cfg.system, rs);
    const dyn::StationaryState st = dyn::steady_state(l, cfg.system);
    const auto rep = thermo::analyze(cfg.system, rs, l, st);
    CHECK(std::abs(rep.q_b) < 1e-13);
    const double t_b = rs.env_temp[static_cast<int>(env::Channel::Body)];
    CHECK(std::abs(rep.theta_b.theta - t_b) < 1e-9);
    CHECK(rep.balance.delta_term == 0.0);
    CHECK(rep.balance.predicted_ratio ==
          doctest::Approx(rs.gm(env::Channel::Body) / rs.gp(env::Channel::Body)).epsilon(1e-12));
}

TEST_CASE("first law and flux-direction law over random configurations") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 60; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        const auto rep = full_report(sol);
        CHECK(rep.first_law_residual <= 1e-10 * std::max(rep.max_flux_abs, 1e-16));

        // sign(Q_n) = sign(T_n - theta_n) through the continuous coordinate
        // 1/theta - 1/T (identical for positive temperatures)
        const struct {
            double q;
            thermo::ExtendedTemp theta;
            env::Channel c;
        } rows[] = {{rep.q_1, rep.theta_1, env::Channel::T1},
                    {rep.q_2, rep.theta_2, env::Channel::T2},
                    {rep.q_3, rep.theta_3, env::Channel::T3},
                    {rep.q_b, rep.theta_b, env::Channel::Body}};
        for (const auto& row : rows) {
            const double t_n = sol.rates.temp(row.c);
            const double direction = -row.theta.neg_inv - 1.0 / t_n;  // 1/theta - 1/T
            if (std::abs(row.q) > 1e-13) CHECK(row.q * direction > 0.0);
        }
    }
}

TEST_CASE("resonant flux: closed form equals the commutator form") {
    std::mt19937_64 rng(34);
    for (int i = 0; i < 20; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        const double closed =
            thermo::heat_flux_resonant(sol.state, sol.rates.lambda, sol.config.system.omega_b());
        const double comm = thermo::heat_flux_resonant_commutator(
            sol.state.rho, sol.config.system, sol.rates.lambda);
        CHECK(std::abs(closed - comm) <= 1e-12 * std::max(1.0, std::abs(closed)));
    }
    // Lambda = 0 gives zero resonant flux
    auto cfg = testsupport::draw_generic(rng);
    cfg.model.lambda_rule = env::LambdaRule::constant(0.0);
    auto sol = testsupport::solve(cfg);
    CHECK(thermo::heat_flux_resonant(sol.state, 0.0, cfg.system.omega_b()) == 0.0);
}

TEST_CASE("non-local flux: closed form, sides agree, bracket cancellation") {
    std::mt19937_64 rng(35);
    for (int i = 0; i < 20; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        const double machine_side = thermo::heat_flux_nonlocal(
            sol.state, sol.rates, sol.liouvillian, sol.config.system, thermo::Side::Machine);
        const double body_side = thermo::heat_flux_nonlocal(
            sol.state, sol.rates, sol.liouvillian, sol.config.system, thermo::Side::Body);
        CHECK(std::abs(machine_side - body_side) <=
              1e-12 * std::max(1.0, std::abs(machine_side)));
    }

    env::RateSet rs{};
    rs.omega_d = 0.6;
    rs.gamma_d_plus = {0.3, 0.1};
    rs.gamma_d_minus = {0.3, -0.1};  // Gd+ = conj(Gd-): bracket vanishes
    CHECK(thermo::nonlocal_closed_form({0.4, 0.2}, rs) == 0.0);
    rs.gamma_d_plus = rs.gamma_d_minus = 0.5;
    CHECK(thermo::nonlocal_closed_form({0.0, 0.0}, rs) == 0.0);  // c_r = 0
}

TEST_CASE("total transition fluxes: routing and the machine energy balance") {
    std::mt19937_64 rng(36);
    using atoms::MachineTransition;
    for (int i = 0; i < 25; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        const auto rep = full_report(sol);
        const auto res = sol.config.system.machine.resonant;

        for (auto n : {MachineTransition::T1, MachineTransition::T2, MachineTransition::T3}) {
            const double total = thermo::total_transition_flux(rep, n, res);
            const double local = n == MachineTransition::T1
                                     ? rep.q_1
                                     : (n == MachineTransition::T2 ? rep.q_2 : rep.q_3);
            if (n == res)
                CHECK(total == doctest::Approx(local + rep.q_r + rep.q_d_machine));
            else
                CHECK(total == local);
        }
        // population-flow conservation: the three totals sum to zero
        const double sum = thermo::total_transition_flux(rep, MachineTransition::T1, res) +
                           thermo::total_transition_flux(rep, MachineTransition::T2, res) +
                           thermo::total_transition_flux(rep, MachineTransition::T3, res);
        CHECK(std::abs(sum) <= 1e-11 * std::max(rep.max_flux_abs, 1e-16));
    }
}

TEST_CASE("flux ratio law on a refrigerating configuration") {
    auto sys = testsupport::fig_system(1.0);
    auto model = testsupport::toy_default_env();
    auto rs = env::rates(model, sys);
    auto l = dyn::assemble(sys, rs);
    auto st = dyn::steady_state(l, sys);
    const auto rep = thermo::analyze(sys, rs, l, st);
    REQUIRE(rep.q_r > 0.0);  // refrigeration
    using atoms::MachineTransition;
    const double t1 = thermo::total_transition_flux(rep, MachineTransition::T1, MachineTransition::T2);
    const double t2 = thermo::total_transition_flux(rep, MachineTransition::T2, MachineTransition::T2);
    const double t3 = thermo::total_transition_flux(rep, MachineTransition::T3, MachineTransition::T2);
    CHECK(std::abs(t1 / t2) == doctest::Approx(0.8 / 0.2).epsilon(1e-6));
    CHECK(std::abs(t1 / t3) == doctest::Approx(0.8 / 1.0).epsilon(1e-6));
}

TEST_CASE("entropy production: dual routes agree and the flux form is lawful") {
    std::mt19937_64 rng(37);
    for (int i = 0; i < 30; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        const auto ent = thermo::entropy_production(sol.liouvillian, sol.state, sol.rates,
                                                    sol.config.system);
        CHECK(std::abs(ent.kernel_form + ent.flux_form) <=
              1e-10 * std::max(std::abs(ent.flux_form), 1e-14));
        CHECK(ent.flux_form <= 1e-14);
    }
}

TEST_CASE("entropy production refuses complex non-local rates") {
    std::mt19937_64 rng(38);
    auto cfg = testsupport::draw_generic(rng);
    auto sol = testsupport::solve(cfg);
    env::RateSet tampered = sol.rates;
    tampered.gamma_d_plus += std::complex<double>(0.0, 0.05);
    tampered.nonlocal_complex = true;
    CHECK_THROWS_AS(
        thermo::entropy_production(sol.liouvillian, sol.state, tampered, cfg.system),
        KernelUnavailable);
}

TEST_CASE("balance relation closes and drives the body temperature") {
    std::mt19937_64 rng(39);
    int cooling_checked = 0;
    for (int i = 0; i < 40; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        const auto rep = full_report(sol);
        CHECK(std::abs(rep.balance.predicted_ratio - rep.balance.measured_ratio) <
              1e-8 * std::abs(rep.balance.measured_ratio));
        const double t_b = sol.rates.temp(env::Channel::Body);
        if (rep.balance.delta_term > 1e-12 && !rep.theta_b.infinite) {
            CHECK(rep.theta_b.theta < t_b);  // Delta > 0 means cooling
            ++cooling_checked;
        }
    }
    CHECK(cooling_checked > 0);
}

TEST_CASE("resonant exchange audit: pure heat, q_m equals q_r") {
    std::mt19937_64 rng(40);
    for (int i = 0; i < 25; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        const auto audit =
            thermo::resonant_exchange_audit(sol.state, sol.config.system, sol.rates.lambda);
        const double q_r =
            thermo::heat_flux_resonant(sol.state, sol.rates.lambda, sol.config.system.omega_b());
        CHECK(audit.h_eff_norm <= 1e-10 * std::max(std::abs(sol.rates.lambda), 1e-3));
        CHECK(std::abs(audit.w_m) <= 1e-10 * std::abs(q_r) + 1e-15 * (1.0 + std::abs(sol.rates.lambda)));
        CHECK(std::abs(audit.q_m - q_r) <= 1e-12 * std::max(1.0, std::abs(q_r)));
    }
}

TEST_CASE("audit on an uncorrelated product state gives zero heat") {
    auto system = testsupport::fig_system();
    dyn::StationaryState st{};
    const Mat6 h0 =
        atoms::hamiltonian_body(system.body) + atoms::hamiltonian_machine(system.machine);
    st.rho = dyn::gibbs_state(h0, 0.5);  // product of diagonal marginals
    st.c_r = dyn::resonant_coherence(st.rho, system);
    for (int i = 0; i < 6; ++i) st.populations[i] = st.rho(i, i).real();
    const auto audit = thermo::resonant_exchange_audit(st, system, 0.8);
    CHECK(std::abs(audit.q_m) < 1e-14);
    CHECK(std::abs(audit.w_m) < 1e-14);
}

TEST_CASE("near-equilibrium linearity of the body flux") {
    // Q_B ~ C (T_B - theta_B) close to equilibrium: positive fitted slope
    std::mt19937_64 rng(41);
    auto cfg = testsupport::draw_generic(rng);
    std::vector<double> xs, ys;
    for (int k = -5; k <= 5; ++k) {
        auto model = cfg.model;
        model.t_s = model.t_w * (1.0 + 0.01 * k / 5.0);
        auto rs = env::rates(model, cfg.system);
        auto l = dyn::assemble(cfg.system, rs);
        auto st = dyn::steady_state(l, cfg.system);
        const auto rep = thermo::analyze(cfg.system, rs, l, st);
        xs.push_back(rs.temp(env::Channel::Body) - rep.theta_b.theta);
        ys.push_back(rep.q_b);
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
    }
    REQUIRE(sxx > 0.0);
    CHECK(sxy / sxx > 0.0);
}
