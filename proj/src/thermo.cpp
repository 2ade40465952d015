#include "otesim/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otesim::thermo {

namespace {

using env::Channel;
using std::complex;

// ln of a Gibbs state for a diagonal Hamiltonian, computed from energies
// directly so low temperatures cannot underflow.
Mat6 log_gibbs(const Mat6& h, double t) {
    double e_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) e_min = std::min(e_min, h(i, i).real());
    double z = 0.0;
    for (int i = 0; i < 6; ++i) z += std::exp(-(h(i, i).real() - e_min) / t);
    const double log_z = std::log(z);
    Mat6 out = Mat6::Zero();
    for (int i = 0; i < 6; ++i) out(i, i) = -(h(i, i).real() - e_min) / t - log_z;
    return out;
}

double real_trace_product(const Mat6& a, const Mat6& b) {
    return (a * b).trace().real();
}

}  // namespace

ExtendedTemp population_temperature(double p_lower, double p_upper, double omega) {
    if (p_lower < -1e-10 || p_upper < -1e-10)
        throw DomainError("population_temperature: negative population");
    p_lower = std::max(p_lower, 0.0);
    p_upper = std::max(p_upper, 0.0);
    if (p_lower == 0.0 && p_upper == 0.0)
        throw DomainError("population_temperature: both populations vanish");

    ExtendedTemp t;
    if (p_lower == p_upper) {
        t.infinite = true;
        t.theta = std::numeric_limits<double>::infinity();
        t.neg_inv = 0.0;
        return t;
    }
    const double log_ratio = std::log(p_lower / p_upper);  // +-inf at a zero population
    t.theta = omega / log_ratio;
    t.neg_inv = -log_ratio / omega;
    return t;
}

Eigen::Matrix3cd machine_marginal(const Mat6& rho) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int b = 0; b < 2; ++b)
                m(i, j) += rho(atoms::basis_index(b, i), atoms::basis_index(b, j));
    return m;
}

Eigen::Matrix2cd body_marginal(const Mat6& rho) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int k = 0; k < 3; ++k)
                m(a, b) += rho(atoms::basis_index(a, k), atoms::basis_index(b, k));
    return m;
}

double heat_flux_local(const Mat6& h_at, const Eigen::MatrixXcd& part, const Mat6& rho) {
    return real_trace_product(h_at, Liouvillian::apply(part, rho));
}

double heat_flux_resonant(const StationaryState& state, double lambda, double omega_b) {
    return 2.0 * omega_b * lambda * state.c_r.imag();
}

double heat_flux_resonant_commutator(const Mat6& rho, const SystemSpec& system, double lambda) {
    const Mat6 h_m = atoms::hamiltonian_machine(system.machine);
    const Mat6 h_mb = atoms::hamiltonian_interaction(lambda, system.machine.resonant);
    const Mat6 comm = h_mb * rho - rho * h_mb;
    return (complex<double>(0.0, -1.0) * (h_m * comm).trace()).real();
}

double nonlocal_closed_form(std::complex<double> c_r, const RateSet& rates) {
    const complex<double> bracket = rates.gamma_d_plus - std::conj(rates.gamma_d_minus);
    return -rates.omega_d * (c_r * bracket).real();
}

double heat_flux_nonlocal(const StationaryState& state, const RateSet& rates,
                          const Liouvillian& l, const SystemSpec& system, Side side) {
    const Mat6 h_at = side == Side::Machine ? atoms::hamiltonian_machine(system.machine)
                                            : atoms::hamiltonian_body(system.body);
    const double trace_form = heat_flux_local(h_at, l.d_nonlocal, state.rho);
    const double closed = nonlocal_closed_form(state.c_r, rates);
    if (!rates.nonlocal_complex) {
        const double scale = std::max({std::abs(closed), std::abs(trace_form), 1e-30});
        if (std::abs(closed - trace_form) > 1e-10 * scale)
            throw FormMismatch("heat_flux_nonlocal: closed and trace forms disagree");
    }
    return trace_form;
}

double total_transition_flux(const FluxReport& report, atoms::MachineTransition n,
                             atoms::MachineTransition resonant) {
    double q = 0.0;
    switch (n) {
        case atoms::MachineTransition::T1: q = report.q_1; break;
        case atoms::MachineTransition::T2: q = report.q_2; break;
        case atoms::MachineTransition::T3: q = report.q_3; break;
    }
    if (n == resonant) q += report.q_r + report.q_d_machine;
    return q;
}

EntropyReport entropy_production(const Liouvillian& l, const StationaryState& state,
                                 const RateSet& rates, const SystemSpec& system) {
    const double gd_mag = std::max(std::abs(rates.gamma_d_plus), std::abs(rates.gamma_d_minus));
    if (rates.nonlocal_complex)
        throw KernelUnavailable("entropy_production: complex non-local rates have no Gibbs kernel");

    const Mat6 h_m = atoms::hamiltonian_machine(system.machine);
    const Mat6 h_b = atoms::hamiltonian_body(system.body);
    const Mat6 h_mb_free = h_m + h_b;

    EntropyReport rep;
    const struct {
        Channel channel;
        const Eigen::MatrixXcd* part;
        const Mat6* h_at;
    } channels[] = {
        {Channel::T1, &l.d_1, &h_m},   {Channel::T2, &l.d_2, &h_m},
        {Channel::T3, &l.d_3, &h_m},   {Channel::Body, &l.d_body, &h_b},
    };
    for (const auto& ch : channels) {
        const int ci = static_cast<int>(ch.channel);
        if (rates.gamma_plus[ci] == 0.0 && rates.gamma_minus[ci] == 0.0) continue;
        const double t = rates.env_temp[ci];
        if (!(t > 0.0))
            throw KernelUnavailable("entropy_production: channel temperature undefined");
        const Mat6 flow = Liouvillian::apply(*ch.part, state.rho);
        rep.flux_form += real_trace_product(*ch.h_at, flow) / t;
        rep.kernel_form += real_trace_product(flow, log_gibbs(*ch.h_at, t));
    }
    if (gd_mag > 0.0) {
        if (!(rates.t_d > 0.0))
            throw KernelUnavailable("entropy_production: non-local temperature undefined");
        const Mat6 flow = Liouvillian::apply(l.d_nonlocal, state.rho);
        // Tr[(H_M + H_B) D_d rho] carries both sides of the non-local current.
        rep.flux_form += real_trace_product(h_mb_free, flow) / rates.t_d;
        rep.kernel_form += real_trace_product(flow, log_gibbs(h_mb_free, rates.t_d));
    }
    return rep;
}

BalanceRelation balance_relation(const StationaryState& state, const RateSet& rates) {
    const complex<double> bracket = rates.gamma_d_plus - std::conj(rates.gamma_d_minus);
    const double delta =
        2.0 * rates.lambda * state.c_r.imag() + (state.c_r * bracket).real();
    const double gbp = rates.gp(Channel::Body);
    const double gbm = rates.gm(Channel::Body);

    BalanceRelation bal;
    bal.delta_term = delta;
    bal.predicted_ratio = (gbm - delta) / (gbp + delta);
    double p_g = 0.0, p_e = 0.0;
    for (int k = 0; k < 3; ++k) {
        p_g += state.populations[atoms::basis_index(0, k)];
        p_e += state.populations[atoms::basis_index(1, k)];
    }
    bal.measured_ratio = p_e / p_g;
    return bal;
}

ResonantAudit resonant_exchange_audit(const StationaryState& state, const SystemSpec& system,
                                      double lambda) {
    const Mat6 h_mb = atoms::hamiltonian_interaction(lambda, system.machine.resonant);
    const Eigen::Matrix2cd rho_b = body_marginal(state.rho);
    const Eigen::Matrix3cd rho_m = machine_marginal(state.rho);

    // H_M^eff = Tr_B[H_MB (rho_B (x) I_M)]
    Eigen::Matrix3cd h_eff = Eigen::Matrix3cd::Zero();
    Mat6 rho_b_ext = Mat6::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int k = 0; k < 3; ++k)
                rho_b_ext(atoms::basis_index(a, k), atoms::basis_index(b, k)) = rho_b(a, b);
    const Mat6 prod = h_mb * rho_b_ext;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int b = 0; b < 2; ++b)
                h_eff(i, j) += prod(atoms::basis_index(b, i), atoms::basis_index(b, j));

    // Commuting/non-commuting split against the nondegenerate machine
    // Hamiltonian: diagonal vs off-diagonal.
    Eigen::Matrix3cd h1 = h_eff.diagonal().asDiagonal();
    Eigen::Matrix3cd h2 = h_eff - h1;

    Eigen::Matrix3cd h_machine = Eigen::Matrix3cd::Zero();
    h_machine(1, 1) = system.machine.omega1();
    h_machine(2, 2) = system.machine.omega3();

    // D_MB = -i Tr_B([H_MB, C_MB]), C_MB = rho - rho_B (x) rho_M
    Mat6 product_state = Mat6::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    product_state(atoms::basis_index(a, i), atoms::basis_index(b, j)) =
                        rho_b(a, b) * rho_m(i, j);
    const Mat6 c_mb = state.rho - product_state;
    const Mat6 comm = h_mb * c_mb - c_mb * h_mb;
    Eigen::Matrix3cd d_mb = Eigen::Matrix3cd::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int b = 0; b < 2; ++b)
                d_mb(i, j) += comm(atoms::basis_index(b, i), atoms::basis_index(b, j));
    d_mb *= complex<double>(0.0, -1.0);

    ResonantAudit audit;
    audit.h_eff_norm = h_eff.cwiseAbs().maxCoeff();
    audit.q_m = ((h_machine + h1) * d_mb).trace().real();
    const Eigen::Matrix3cd work_comm = (h_machine + h1) * h2 - h2 * (h_machine + h1);
    audit.w_m = (complex<double>(0.0, -1.0) * (work_comm * rho_m).trace()).real();

    const double q_r = 2.0 * system.omega_b() * lambda * state.c_r.imag();
    const double w_floor = 1e-10 * std::abs(q_r) + 1e-15 * (1.0 + std::abs(lambda));
    if (std::abs(audit.w_m) > w_floor)
        throw AuditFailure("resonant_exchange_audit: nonzero work rate");
    if (audit.h_eff_norm > 1e-10 * std::max(std::abs(lambda), 1e-3))
        throw AuditFailure("resonant_exchange_audit: effective Hamiltonian renormalisation");
    return audit;
}

FluxReport analyze(const SystemSpec& system, const RateSet& rates, const Liouvillian& l,
                   const StationaryState& state) {
    const Mat6 h_m = atoms::hamiltonian_machine(system.machine);
    const Mat6 h_b = atoms::hamiltonian_body(system.body);

    FluxReport rep;
    rep.q_1 = heat_flux_local(h_m, l.d_1, state.rho);
    rep.q_2 = heat_flux_local(h_m, l.d_2, state.rho);
    rep.q_3 = heat_flux_local(h_m, l.d_3, state.rho);
    rep.q_b = heat_flux_local(h_b, l.d_body, state.rho);
    rep.q_d_machine = heat_flux_local(h_m, l.d_nonlocal, state.rho);
    rep.q_d_body = heat_flux_local(h_b, l.d_nonlocal, state.rho);
    rep.q_d_total = rep.q_d_machine + rep.q_d_body;
    rep.q_d_closed_form = nonlocal_closed_form(state.c_r, rates);
    if (!rates.nonlocal_complex) {
        const double scale =
            std::max({std::abs(rep.q_d_closed_form), std::abs(rep.q_d_machine), 1e-30});
        if (std::abs(rep.q_d_closed_form - rep.q_d_machine) > 1e-10 * scale)
            throw FormMismatch("analyze: non-local closed form disagrees with trace form");
    } else {
        rep.nonlocal_form_mismatch =
            std::abs(rep.q_d_closed_form - rep.q_d_machine) >
            1e-10 * std::max(std::abs(rep.q_d_machine), 1e-30);
    }
    rep.q_r = heat_flux_resonant(state, rates.lambda, system.omega_b());

    rep.first_law_residual = std::abs(rep.q_b + rep.q_1 + rep.q_2 + rep.q_3 + rep.q_d_total);

    rep.populations = state.populations;
    const Eigen::Matrix3cd rho_m = machine_marginal(state.rho);
    const Eigen::Matrix2cd rho_b = body_marginal(state.rho);
    const double pm0 = rho_m(0, 0).real(), pm1 = rho_m(1, 1).real(), pm2 = rho_m(2, 2).real();
    rep.p_g = rho_b(0, 0).real();
    rep.p_e = rho_b(1, 1).real();
    rep.theta_1 = population_temperature(pm0, pm1, system.machine.omega1());
    rep.theta_2 = population_temperature(pm1, pm2, system.machine.omega2());
    rep.theta_3 = population_temperature(pm0, pm2, system.machine.omega3());
    rep.theta_b = population_temperature(rep.p_g, rep.p_e, system.omega_b());

    try {
        const EntropyReport ent = entropy_production(l, state, rates, system);
        rep.entropy_flux_form = ent.flux_form;
        rep.entropy_kernel_form = ent.kernel_form;
    } catch (const KernelUnavailable&) {
        rep.entropy_skipped = true;
    }

    rep.c_r = state.c_r;
    rep.discord_proxy = std::abs(state.c_r);
    rep.balance = balance_relation(state, rates);
    rep.audit = resonant_exchange_audit(state, system, rates.lambda);
    rep.max_flux_abs = std::max({std::abs(rep.q_1), std::abs(rep.q_2), std::abs(rep.q_3),
                                 std::abs(rep.q_b), std::abs(rep.q_d_total), std::abs(rep.q_r)});
    return rep;
}

}  // namespace otesim::thermo
