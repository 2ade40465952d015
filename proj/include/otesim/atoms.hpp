// atoms.hpp — Atomic Hilbert spaces, ladder operators and Hamiltonian terms
//
// Composite basis contract (frozen, shared by every module):
//   index = 3*b + m with b in {0:|g>, 1:|e>} (body) and m in {0,1,2}
//   (machine), i.e. {|g0>, |g1>, |g2>, |e0>, |e1>, |e2>}.

#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "otesim/errors.hpp"

namespace otesim::atoms {

using Mat6 = Eigen::Matrix<std::complex<double>, 6, 6>;

inline constexpr int dim = 6;

// Composite basis index for body level b (0=g, 1=e) and machine level m.
inline constexpr int basis_index(int b, int m) { return 3 * b + m; }

// One dipole transition: frequency in units of omega_S, dipole_scale fixes
// the vacuum rate Gamma0 = dipole_scale * omega^3.
struct TransitionSpec {
    double frequency{0.0};
    double dipole_scale{1.0};

    TransitionSpec() = default;
    TransitionSpec(double freq, double dip) : frequency(freq), dipole_scale(dip) {
        if (!(frequency > 0.0)) throw ConstraintViolation("TransitionSpec: frequency must be > 0");
        if (!(dipole_scale >= 0.0)) throw ConstraintViolation("TransitionSpec: dipole_scale must be >= 0");
    }
};

// Which transition a machine operator acts on. Transition 1 connects levels
// (0,1), transition 2 connects (1,2), transition 3 connects (0,2).
enum class MachineTransition : int { T1 = 1, T2 = 2, T3 = 3 };

inline constexpr int lower_level(MachineTransition t) {
    return t == MachineTransition::T2 ? 1 : 0;
}
inline constexpr int upper_level(MachineTransition t) {
    return t == MachineTransition::T1 ? 1 : 2;
}

// Three-level machine with the ladder constraint omega3 = omega1 + omega2
// enforced at construction. Level energies are (0, omega1, omega3).
struct MachineSpec {
    std::array<TransitionSpec, 3> transitions;  // [0]=1, [1]=2, [2]=3
    MachineTransition resonant{MachineTransition::T2};

    // omega3 is derived from the ladder rule.
    static MachineSpec make(double omega1, double omega2,
                            double dipole1, double dipole2, double dipole3,
                            MachineTransition resonant);

    // Validating variant for callers that carry an explicit omega3.
    static MachineSpec make_explicit(double omega1, double omega2, double omega3,
                                     double dipole1, double dipole2, double dipole3,
                                     MachineTransition resonant);

    double omega(MachineTransition t) const {
        return transitions[static_cast<int>(t) - 1].frequency;
    }
    const TransitionSpec& transition(MachineTransition t) const {
        return transitions[static_cast<int>(t) - 1];
    }
    double omega1() const { return transitions[0].frequency; }
    double omega2() const { return transitions[1].frequency; }
    double omega3() const { return transitions[2].frequency; }
    double resonant_gap() const { return omega(resonant); }
};

// Two-level target body.
struct BodySpec {
    TransitionSpec transition;
};

// Atom placement: distance z from the slab, interatomic distance r, both um.
struct Geometry {
    double z{1.0};
    double r{1.0};

    Geometry() = default;
    Geometry(double z_um, double r_um) : z(z_um), r(r_um) {
        if (!(z > 0.0)) throw ConstraintViolation("Geometry: z must be > 0");
        if (!(r > 0.0)) throw ConstraintViolation("Geometry: r must be > 0");
    }
};

// The two atoms together. Construction enforces exact resonance: the body
// frequency is identical to the designated machine gap.
struct SystemSpec {
    MachineSpec machine;
    BodySpec body;
    Geometry geometry;

    static SystemSpec make(MachineSpec machine, double body_dipole_scale, Geometry geometry);
    static SystemSpec make_checked(MachineSpec machine, BodySpec body, Geometry geometry);

    double omega_b() const { return body.transition.frequency; }
    // Composite indices of the degenerate resonant pair {|e,lower_r>, |g,upper_r>}.
    int resonant_excited_index() const { return basis_index(1, lower_level(machine.resonant)); }
    int resonant_ground_index() const { return basis_index(0, upper_level(machine.resonant)); }
};

enum class Ladder { Body, Machine1, Machine2, Machine3 };

// sigma = |g><e| (x) I3; kappa_n = I2 (x) |lower_n><upper_n|.
Mat6 lowering_operator(Ladder which);

inline Mat6 lowering_operator(MachineTransition t) {
    switch (t) {
        case MachineTransition::T1: return lowering_operator(Ladder::Machine1);
        case MachineTransition::T2: return lowering_operator(Ladder::Machine2);
        default: return lowering_operator(Ladder::Machine3);
    }
}

// H_B = omega_B sigma^dag sigma (frequency shifts set to zero).
Mat6 hamiltonian_body(const BodySpec& spec);

// H_M = omega1 (I2 (x) |1><1|) + omega3 (I2 (x) |2><2|).
Mat6 hamiltonian_machine(const MachineSpec& spec);

// H_MB = lambda (sigma^dag kappa_r + sigma kappa_r^dag), coupling only the
// degenerate pair {|g,upper_r>, |e,lower_r>}.
Mat6 hamiltonian_interaction(double lambda, MachineTransition resonant);

// H_B + H_M + H_MB for the composite system.
Mat6 hamiltonian_total(const SystemSpec& system, double lambda);

}  // namespace otesim::atoms
