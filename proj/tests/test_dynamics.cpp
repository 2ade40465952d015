#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "support.hpp"

using namespace otesim;
using atoms::Mat6;
using dyn::MatrixXcd;
using dyn::VectorXcd;

namespace {

Mat6 random_hermitian(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat6 m;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) = std::complex<double>(g(rng), g(rng));
    return 0.5 * (m + Mat6(m.adjoint()));
}

// d(tr rho)/dt functional of a superoperator part: row sums over the
// diagonal slots of the column stacking.
double trace_row_norm(const MatrixXcd& part) {
    VectorXcd row = VectorXcd::Zero(36);
    for (int k = 0; k < 6; ++k) row += part.row(7 * k);
    return row.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("vec/unvec and the sandwich identity") {
    std::mt19937_64 rng(21);
    const Mat6 rho = random_hermitian(rng);
    CHECK((dyn::unvec(dyn::vec(rho)) - rho).cwiseAbs().maxCoeff() == 0.0);

    const Mat6 a = random_hermitian(rng);
    const Mat6 b = random_hermitian(rng);
    const Mat6 via_super = dyn::unvec(dyn::sandwich(a, b) * dyn::vec(rho));
    CHECK((via_super - a * rho * b).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("local dissipator: zero-temperature decay and infinite-temperature balance") {
    const Mat6 sigma = atoms::lowering_operator(atoms::Ladder::Body);

    // Gamma- = 0: excited population decays as exp(-Gamma+ t)
    const double gp = 0.7;
    MatrixXcd d = dyn::local_dissipator(gp, 0.0, sigma);
    dyn::Liouvillian l;
    l.total = d;
    Mat6 rho0 = Mat6::Zero();
    rho0(atoms::basis_index(1, 0), atoms::basis_index(1, 0)) = 1.0;
    const double t = 2.3;
    const Mat6 rho_t = dyn::time_evolve(l, rho0, t, 0.01 / dyn::generator_norm(l));
    CHECK(rho_t(3, 3).real() == doctest::Approx(std::exp(-gp * t)).epsilon(1e-8));
    CHECK(rho_t(0, 0).real() == doctest::Approx(1.0 - std::exp(-gp * t)).epsilon(1e-8));

    // Gamma+ = Gamma-: the maximally mixed state is balanced
    d = dyn::local_dissipator(0.4, 0.4, sigma);
    const Mat6 flow = dyn::Liouvillian::apply(d, Mat6(Mat6::Identity() / 6.0));
    CHECK(flow.cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(dyn::local_dissipator(-0.1, 0.0, sigma), DomainError);
}

TEST_CASE("local dissipator kernel is the transition Gibbs ratio") {
    // body channel alone: p_e/p_g = Gamma-/Gamma+
    auto system = testsupport::fig_system();
    env::RateSet rs{};
    rs.omega = {0.8, 0.2, 1.0, 0.2};
    rs.omega_d = 0.2;
    rs.gamma_plus = {0.5, 0.3, 0.9, 0.31};
    rs.gamma_minus = {0.2, 0.1, 0.4, 0.17};
    rs.lambda = 0.0;
    const dyn::Liouvillian l = dyn::assemble(system, rs);
    const dyn::StationaryState st = dyn::steady_state(l, system);
    double p_g = 0, p_e = 0;
    for (int k = 0; k < 3; ++k) {
        p_g += st.populations[atoms::basis_index(0, k)];
        p_e += st.populations[atoms::basis_index(1, k)];
    }
    CHECK(p_e / p_g == doctest::Approx(0.17 / 0.31).epsilon(1e-12));
}

TEST_CASE("nonlocal dissipator: decoupled limit, trace and Gibbs kernel") {
    const Mat6 sigma = atoms::lowering_operator(atoms::Ladder::Body);
    const Mat6 kappa = atoms::lowering_operator(atoms::MachineTransition::T2);

    CHECK(dyn::nonlocal_dissipator(0.0, 0.0, sigma, kappa).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(22);
    const MatrixXcd d = dyn::nonlocal_dissipator({0.35, 0.0}, {0.12, 0.0}, sigma, kappa);
    for (int i = 0; i < 5; ++i) {
        const Mat6 out = dyn::Liouvillian::apply(d, random_hermitian(rng));
        CHECK(std::abs(out.trace()) < 1e-13);
        CHECK((out - Mat6(out.adjoint())).cwiseAbs().maxCoeff() < 1e-13);
    }

    // real Gamma_d at detailed balance: product Gibbs state at T_d is a kernel
    auto system = testsupport::fig_system();
    const double t_d = 0.41;
    const double n = env::photon_occupation(0.2, t_d);
    const MatrixXcd dd = dyn::nonlocal_dissipator({1.0 + n, 0.0}, {n, 0.0}, sigma, kappa);
    const Mat6 h0 =
        atoms::hamiltonian_body(system.body) + atoms::hamiltonian_machine(system.machine);
    const Mat6 gibbs = dyn::gibbs_state(h0, t_d);
    CHECK(dyn::Liouvillian::apply(dd, gibbs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("assembled generator: part bookkeeping, trace and Hermiticity preservation") {
    std::mt19937_64 rng(23);
    auto cfg = testsupport::draw_generic(rng);
    auto rs = env::rates(cfg.model, cfg.system);
    const dyn::Liouvillian l = dyn::assemble(cfg.system, rs);

    const MatrixXcd sum =
        l.hamiltonian + l.d_1 + l.d_2 + l.d_3 + l.d_body + l.d_nonlocal;
    CHECK((l.total - sum).cwiseAbs().maxCoeff() < 1e-14);

    CHECK(trace_row_norm(l.total) < 1e-12);
    for (const auto* part : {&l.d_1, &l.d_2, &l.d_3, &l.d_body, &l.d_nonlocal})
        CHECK(trace_row_norm(*part) < 1e-12);

    for (int i = 0; i < 100; ++i) {
        const Mat6 probe = random_hermitian(rng);
        const Mat6 lp = dyn::Liouvillian::apply(l.total, probe);
        CHECK((lp - Mat6(lp.adjoint())).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(lp.trace()) < 1e-12);
    }
}

TEST_CASE("steady state at equilibrium is the Gibbs product with no coherence") {
    std::mt19937_64 rng(24);
    for (int i = 0; i < 5; ++i) {
        auto cfg = testsupport::draw_generic(rng, /*equilibrium=*/true);
        auto sol = testsupport::solve(cfg);
        const Mat6 h0 = atoms::hamiltonian_body(cfg.system.body) +
                        atoms::hamiltonian_machine(cfg.system.machine);
        const Mat6 gibbs = dyn::gibbs_state(h0, cfg.model.t_w);
        CHECK(dyn::trace_distance(sol.state.rho, gibbs) < 1e-10);
        CHECK(std::abs(sol.state.c_r) < 1e-10);
    }
}

TEST_CASE("steady state structure on random configurations") {
    std::mt19937_64 rng(25);
    for (int i = 0; i < 40; ++i) {
        auto sol = testsupport::solve(testsupport::draw_generic(rng));
        CHECK(std::abs(sol.state.rho.trace().real() - 1.0) < 1e-12);
        CHECK(sol.state.min_eigenvalue >= -1e-10);
        CHECK(sol.state.max_offresonant_coherence < 1e-8);
        CHECK(sol.state.residual < 1e-10);

        const Eigen::Matrix3cd rho_m = thermo::machine_marginal(sol.state.rho);
        const Eigen::Matrix2cd rho_b = thermo::body_marginal(sol.state.rho);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b) CHECK(std::abs(rho_m(a, b)) < 1e-8);
        CHECK(std::abs(rho_b(0, 1)) < 1e-8);
    }
}

TEST_CASE("no coherence without coupling") {
    std::mt19937_64 rng(26);
    auto cfg = testsupport::draw_generic(rng);
    cfg.model.lambda_rule = env::LambdaRule::constant(0.0);
    cfg.model.xi = 1e-6;  // f(r) ~ 0
    auto rs = env::rates(cfg.model, cfg.system);
    rs.gamma_d_plus = rs.gamma_d_minus = 0.0;
    const dyn::Liouvillian l = dyn::assemble(cfg.system, rs);
    const dyn::StationaryState st = dyn::steady_state(l, cfg.system);
    CHECK(std::abs(st.c_r) < 1e-10);
}

TEST_CASE("degenerate nullspace is detected") {
    // body with no dissipation and no coupling: any body state is stationary
    auto machine = atoms::MachineSpec::make(0.8, 0.2, 1.0, 1.0, 1.0,
                                            atoms::MachineTransition::T2);
    auto system = atoms::SystemSpec::make(machine, 0.0, atoms::Geometry(1.0, 1.0));
    env::EnvironmentModel model;
    model.t_w = model.t_s = 0.5;
    model.provider = std::make_shared<env::TwoTemperatureFlat>();
    model.lambda_rule = env::LambdaRule::constant(0.0);
    env::RateSet rs = env::rates(model, system);
    rs.gamma_d_plus = rs.gamma_d_minus = 0.0;  // dead cross channel
    const dyn::Liouvillian l = dyn::assemble(system, rs);
    CHECK_THROWS_AS(dyn::steady_state(l, system), DegenerateSteadyState);
}

TEST_CASE("RK4 basics: null generator, stability bound, trace conservation") {
    dyn::Liouvillian l;
    l.total = MatrixXcd::Zero(36, 36);
    std::mt19937_64 rng(27);
    Mat6 rho0 = random_hermitian(rng);
    rho0 = rho0 * rho0;  // positive
    rho0 /= rho0.trace().real();
    // ||L|| = 0 makes the bound infinite; any dt is admissible
    CHECK((dyn::time_evolve(l, rho0, 1.0, 0.5) - rho0).cwiseAbs().maxCoeff() == 0.0);

    auto cfg = testsupport::draw_oracle(rng);
    auto sol = testsupport::solve(cfg);
    const double bound = 0.1 / dyn::generator_norm(sol.liouvillian);
    CHECK_THROWS_AS(dyn::time_evolve(sol.liouvillian, rho0, 1.0, 2.0 * bound), StepTooLarge);

    const Mat6 rho_t = dyn::time_evolve(sol.liouvillian, Mat6(Mat6::Identity() / 6.0),
                                        100.0, 0.9 * bound);
    CHECK(std::abs(rho_t.trace().real() - 1.0) < 1e-9);
}

TEST_CASE("RK4 long-time state matches the nullspace steady state") {
    std::mt19937_64 rng(28);
    for (int i = 0; i < 3; ++i) {
        auto sol = testsupport::solve(testsupport::draw_oracle(rng));
        const double t_final = dyn::default_t_final(sol.rates);
        const double dt = 0.09 / dyn::generator_norm(sol.liouvillian);
        const Mat6 endpoint =
            dyn::time_evolve(sol.liouvillian, Mat6(Mat6::Identity() / 6.0), t_final, dt);
        CHECK(dyn::trace_distance(endpoint, sol.state.rho) < 1e-6);
    }
}

TEST_CASE("trace distance and Gibbs helpers") {
    Mat6 a = Mat6::Zero();
    a(0, 0) = 1.0;
    Mat6 b = Mat6::Zero();
    b(1, 1) = 1.0;
    CHECK(dyn::trace_distance(a, b) == doctest::Approx(1.0));
    CHECK_THROWS_AS(dyn::gibbs_state(a, 0.0), DomainError);

    const Mat6 h = atoms::hamiltonian_machine(
        atoms::MachineSpec::make(0.5, 0.25, 1, 1, 1, atoms::MachineTransition::T1));
    const Mat6 g = dyn::gibbs_state(h, 0.3);
    CHECK(g.trace().real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g(1, 1).real() / g(0, 0).real() == doctest::Approx(std::exp(-0.5 / 0.3)));
}
