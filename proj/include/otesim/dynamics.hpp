// dynamics.hpp — Liouvillian assembly and stationary-state solvers
//
// Superoperators use the column-stacking convention: vec(rho) stacks the
// columns of rho, so vec(A rho B) = (B^T (x) A) vec(rho). All 36x36 indexing
// in the project flows from this choice.

#pragma once

#include <complex>

#include <Eigen/Dense>

#include "otesim/atoms.hpp"
#include "otesim/environment.hpp"

namespace otesim::dyn {

using atoms::Mat6;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Column-stacking vectorisation and its inverse.
VectorXcd vec(const Mat6& rho);
Mat6 unvec(const VectorXcd& v);

// Superoperator for rho -> A rho B.
MatrixXcd sandwich(const Mat6& a, const Mat6& b);

// Superoperator for rho -> -i [h, rho].
MatrixXcd commutator_superop(const Mat6& h);

// Lindblad local channel: Gamma+ pairs with the lowering operator,
//   Gamma+ (C rho C^dag - {C^dag C, rho}/2) + Gamma- (C^dag rho C - {C C^dag, rho}/2).
MatrixXcd local_dissipator(double gamma_plus, double gamma_minus, const Mat6& ladder);

// Cross channel acting at omega_B, Hermitian-conjugate block included with
// conjugated rates so the map preserves Hermiticity:
//   Gd+ (k rho s^dag - {s^dag k, rho}/2) + Gd- (k^dag rho s - {s k^dag, rho}/2) + h.c.
MatrixXcd nonlocal_dissipator(std::complex<double> gamma_d_plus,
                              std::complex<double> gamma_d_minus, const Mat6& sigma,
                              const Mat6& kappa_r);

// Generator of the master equation with all parts retained individually for
// per-dissipator flux and entropy accounting.
struct Liouvillian {
    MatrixXcd total;        // 36x36
    MatrixXcd hamiltonian;  // -i[H_T, .]
    MatrixXcd d_1, d_2, d_3, d_body, d_nonlocal;

    const MatrixXcd& part(env::Channel c) const {
        switch (c) {
            case env::Channel::T1: return d_1;
            case env::Channel::T2: return d_2;
            case env::Channel::T3: return d_3;
            case env::Channel::Body: return d_body;
            default: return d_nonlocal;
        }
    }

    // Apply a 36x36 part to a density matrix.
    static Mat6 apply(const MatrixXcd& part, const Mat6& rho);
};

Liouvillian assemble(const atoms::SystemSpec& system, const env::RateSet& rates);

struct StationaryState {
    Mat6 rho;
    std::complex<double> c_r;           // resonant coherence <e,lower_r| rho |g,upper_r>
    std::array<double, 6> populations;  // diagonal in the composite basis
    double residual;                    // max-norm of L(rho)
    double min_eigenvalue;              // before clipping
    double max_offresonant_coherence;   // X-structure diagnostic
};

struct SolverOptions {
    double tolerance{1e-10};           // residual bound on L(rho)
    double degeneracy_threshold{1e-10};  // second singular value vs first
    double negativity_limit{1e-10};    // eigenvalues below -limit are an error
    bool check_nullspace{true};
};

// Solve L(rho) = 0 with tr rho = 1 by dense LU with a trace-replacement row.
// Hermitises the result, clips eigenvalues in [-negativity_limit, 0) and
// renormalises.
StationaryState steady_state(const Liouvillian& liouvillian, const atoms::SystemSpec& system,
                             const SolverOptions& options = {});

// Infinity norm of the generator, used for the RK4 stability bound.
double generator_norm(const Liouvillian& liouvillian);

// Fixed-step RK4 on d rho / dt = L(rho). dt must stay below 0.1/||L||.
Mat6 time_evolve(const Liouvillian& liouvillian, const Mat6& rho0, double t_final, double dt);

// Default horizon 50 / min(nonzero Gamma).
double default_t_final(const env::RateSet& rates);

// Extract the resonant coherence for the given system.
std::complex<double> resonant_coherence(const Mat6& rho, const atoms::SystemSpec& system);

// Largest off-diagonal magnitude outside the resonant pair.
double max_offresonant_coherence(const Mat6& rho, const atoms::SystemSpec& system);

// Trace distance ||a - b||_1 / 2 between density matrices.
double trace_distance(const Mat6& a, const Mat6& b);

// Gibbs state exp(-h/t)/Z for a diagonal Hamiltonian h.
Mat6 gibbs_state(const Mat6& h, double t);

}  // namespace otesim::dyn
