#include "otesim/atoms.hpp"

#include <cmath>

namespace otesim::atoms {

MachineSpec MachineSpec::make(double omega1, double omega2,
                              double dipole1, double dipole2, double dipole3,
                              MachineTransition resonant) {
    if (!(omega1 > 0.0) || !(omega2 > 0.0))
        throw ConstraintViolation("MachineSpec: omega1 and omega2 must be > 0");
    MachineSpec spec;
    spec.transitions = {TransitionSpec(omega1, dipole1), TransitionSpec(omega2, dipole2),
                        TransitionSpec(omega1 + omega2, dipole3)};
    spec.resonant = resonant;
    return spec;
}

MachineSpec MachineSpec::make_explicit(double omega1, double omega2, double omega3,
                                       double dipole1, double dipole2, double dipole3,
                                       MachineTransition resonant) {
    if (omega3 != omega1 + omega2)
        throw ConstraintViolation("MachineSpec: ladder rule omega3 = omega1 + omega2 violated");
    return make(omega1, omega2, dipole1, dipole2, dipole3, resonant);
}

SystemSpec SystemSpec::make(MachineSpec machine, double body_dipole_scale, Geometry geometry) {
    SystemSpec sys;
    sys.body.transition = TransitionSpec(machine.resonant_gap(), body_dipole_scale);
    sys.machine = machine;
    sys.geometry = geometry;
    return sys;
}

SystemSpec SystemSpec::make_checked(MachineSpec machine, BodySpec body, Geometry geometry) {
    if (body.transition.frequency != machine.resonant_gap())
        throw ConstraintViolation("SystemSpec: body frequency must equal the resonant machine gap");
    SystemSpec sys;
    sys.machine = machine;
    sys.body = body;
    sys.geometry = geometry;
    return sys;
}

Mat6 lowering_operator(Ladder which) {
    Mat6 op = Mat6::Zero();
    if (which == Ladder::Body) {
        // |g,k><e,k| for every machine level k
        for (int k = 0; k < 3; ++k) op(basis_index(0, k), basis_index(1, k)) = 1.0;
        return op;
    }
    int lo = 0, hi = 0;
    switch (which) {
        case Ladder::Machine1: lo = 0; hi = 1; break;
        case Ladder::Machine2: lo = 1; hi = 2; break;
        case Ladder::Machine3: lo = 0; hi = 2; break;
        default: break;
    }
    for (int b = 0; b < 2; ++b) op(basis_index(b, lo), basis_index(b, hi)) = 1.0;
    return op;
}

Mat6 hamiltonian_body(const BodySpec& spec) {
    Mat6 h = Mat6::Zero();
    for (int k = 0; k < 3; ++k) h(basis_index(1, k), basis_index(1, k)) = spec.transition.frequency;
    return h;
}

Mat6 hamiltonian_machine(const MachineSpec& spec) {
    Mat6 h = Mat6::Zero();
    for (int b = 0; b < 2; ++b) {
        h(basis_index(b, 1), basis_index(b, 1)) = spec.omega1();
        h(basis_index(b, 2), basis_index(b, 2)) = spec.omega3();
    }
    return h;
}

Mat6 hamiltonian_interaction(double lambda, MachineTransition resonant) {
    if (!std::isfinite(lambda)) throw DomainError("hamiltonian_interaction: lambda must be finite");
    Mat6 kappa = lowering_operator(resonant);
    Mat6 sigma = lowering_operator(Ladder::Body);
    Mat6 h = lambda * (sigma.adjoint() * kappa);
    return h + Mat6(h.adjoint());
}

Mat6 hamiltonian_total(const SystemSpec& system, double lambda) {
    return hamiltonian_body(system.body) + hamiltonian_machine(system.machine) +
           hamiltonian_interaction(lambda, system.machine.resonant);
}

}  // namespace otesim::atoms
