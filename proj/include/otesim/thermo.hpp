// thermo.hpp — Heat currents, population temperatures, first/second-law
// diagnostics and the resonant heat/work audit.
//
// Sign convention everywhere: positive flux = absorbed by the atoms.

#pragma once

#include <array>
#include <complex>

#include "otesim/atoms.hpp"
#include "otesim/dynamics.hpp"
#include "otesim/environment.hpp"

namespace otesim::thermo {

using atoms::Mat6;
using atoms::SystemSpec;
using dyn::Liouvillian;
using dyn::StationaryState;
using env::RateSet;

// Temperature on the extended line: +inf at equal populations, negative
// under inversion. neg_inv = -1/theta is the continuous phase coordinate.
struct ExtendedTemp {
    double theta{0.0};
    double neg_inv{0.0};
    bool infinite{false};
};

// theta = omega / ln(p_lower / p_upper).
ExtendedTemp population_temperature(double p_lower, double p_upper, double omega);

// Coherence-driven balance of the body populations:
// predicted p_e/p_g = (Gamma_B- - Delta) / (Gamma_B+ + Delta).
struct BalanceRelation {
    double predicted_ratio{0.0};
    double measured_ratio{0.0};
    double delta_term{0.0};
};

struct EntropyReport {
    double flux_form{0.0};    // Q1/T1 + Q2/T2 + Q3/T3 + QB/TB + Qd_total/Td; <= 0 lawful
    double kernel_form{0.0};  // sum_k Tr[(D_k rho) ln rho_k]; >= 0 lawful
    bool skipped{false};      // complex non-local rates: kernels unavailable
};

// Appendix-style audit of the resonant exchange: the machine-body energy
// flow must be pure heat (w_m ~ 0) and equal the resonant current.
struct ResonantAudit {
    double q_m{0.0};
    double w_m{0.0};
    double h_eff_norm{0.0};
};

struct FluxReport {
    double q_1{0.0}, q_2{0.0}, q_3{0.0}, q_b{0.0};
    // The non-local current is seen equally by machine and body; the total
    // (machine side + body side) is what enters the first and second laws.
    double q_d_machine{0.0};
    double q_d_body{0.0};
    double q_d_total{0.0};
    double q_d_closed_form{0.0};  // -omega_B Re{c_r (Gd+ - conj(Gd-))}, one side
    double q_r{0.0};              // resonant current into the machine
    double first_law_residual{0.0};
    double entropy_flux_form{0.0};
    double entropy_kernel_form{0.0};
    bool entropy_skipped{false};
    bool nonlocal_form_mismatch{false};  // closed vs trace form (complex rates only)
    ExtendedTemp theta_1, theta_2, theta_3, theta_b;
    std::complex<double> c_r{0.0};
    double discord_proxy{0.0};  // |c_r|
    BalanceRelation balance;
    ResonantAudit audit;
    double max_flux_abs{0.0};
    std::array<double, 6> populations{};
    double p_g{0.0}, p_e{0.0};
};

// Partial traces in the frozen basis order (body factor first).
Eigen::Matrix3cd machine_marginal(const Mat6& rho);
Eigen::Matrix2cd body_marginal(const Mat6& rho);

// Q = Tr[H_at (part rho)], H_at = H_M for machine channels, H_B for the body.
double heat_flux_local(const Mat6& h_at, const Eigen::MatrixXcd& part, const Mat6& rho);

// Closed form Q_r = 2 omega_B Lambda Im(c_r).
double heat_flux_resonant(const StationaryState& state, double lambda, double omega_b);

// Independent route: -i Tr(H_M [H_MB, rho]).
double heat_flux_resonant_commutator(const Mat6& rho, const SystemSpec& system, double lambda);

enum class Side { Machine, Body };

// One side of the non-local current, Tr[H_side (D_d rho)], checked against
// the closed form when the rates are real.
double heat_flux_nonlocal(const StationaryState& state, const RateSet& rates,
                          const Liouvillian& liouvillian, const SystemSpec& system, Side side);

// Closed form -omega_B Re{c_r [Gd+ - (Gd-)^*]}.
double nonlocal_closed_form(std::complex<double> c_r, const RateSet& rates);

// Total flux along machine transition n; the resonant transition also
// carries the resonant current and the machine-side non-local current.
double total_transition_flux(const FluxReport& report, atoms::MachineTransition n,
                             atoms::MachineTransition resonant);

// Both routes to the stationary second law. Throws KernelUnavailable when
// the non-local rates are complex (no Gibbs kernel exists for D_d).
EntropyReport entropy_production(const Liouvillian& liouvillian, const StationaryState& state,
                                 const RateSet& rates, const SystemSpec& system);

BalanceRelation balance_relation(const StationaryState& state, const RateSet& rates);

// Throws AuditFailure when a nonzero work rate or effective Hamiltonian
// shows up; both signal a solver or assembly defect.
ResonantAudit resonant_exchange_audit(const StationaryState& state, const SystemSpec& system,
                                      double lambda);

// Full stationary thermodynamic report.
FluxReport analyze(const SystemSpec& system, const RateSet& rates,
                   const Liouvillian& liouvillian, const StationaryState& state);

}  // namespace otesim::thermo
