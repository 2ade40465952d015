// support.hpp — shared random ensembles and fixtures for the test suites

#pragma once

#include <memory>
#include <random>

#include "otesim/analysis.hpp"
#include "otesim/atoms.hpp"
#include "otesim/dynamics.hpp"
#include "otesim/environment.hpp"
#include "otesim/thermo.hpp"
#include "otesim/units.hpp"

namespace testsupport {

using namespace otesim;

struct RandomConfig {
    atoms::SystemSpec system;
    env::EnvironmentModel model;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Generic nonequilibrium draw: per-channel flat response weights, random
// machine geometry and coupling. Rates span a few decades; fine for the
// direct (LU) solver sweeps.
inline RandomConfig draw_generic(std::mt19937_64& rng, bool equilibrium = false) {
    const double omega1 = uniform(rng, 0.35, 0.95);
    const double omega2 = uniform(rng, 0.15, 0.70);
    const auto resonant = static_cast<atoms::MachineTransition>(
        1 + static_cast<int>(uniform(rng, 0.0, 3.0 - 1e-12)));

    const double g1 = uniform(rng, 0.4, 1.6);
    const double g2 = uniform(rng, 0.4, 1.6);
    const double g3 = uniform(rng, 0.4, 1.6);
    const double gb = uniform(rng, 0.4, 1.6);
    const double omega3 = omega1 + omega2;
    auto machine = atoms::MachineSpec::make(
        omega1, omega2, g1 / (omega1 * omega1 * omega1), g2 / (omega2 * omega2 * omega2),
        g3 / (omega3 * omega3 * omega3), resonant);
    const double omega_b = machine.resonant_gap();
    auto system = atoms::SystemSpec::make(machine, gb / (omega_b * omega_b * omega_b),
                                          atoms::Geometry(1.0, 1.0));

    std::array<std::array<double, 2>, 4> weights;
    for (auto& w : weights) w = {uniform(rng, 0.3, 1.1), uniform(rng, 0.3, 1.1)};

    env::EnvironmentModel model;
    model.t_w = uniform(rng, 0.35, 1.0);
    model.t_s = equilibrium ? model.t_w : uniform(rng, 0.35, 1.0);
    model.provider = std::make_shared<env::TwoTemperatureFlat>(weights);
    model.lambda_rule = env::LambdaRule::constant(uniform(rng, -0.25, 0.25));
    const double f = uniform(rng, 0.15, 0.9);
    model.xi = -1.0 / std::log(f);  // r = 1 um, so f(r) = f
    return {system, model};
}

// Narrower draw for the RK4 oracle: rates within roughly one decade keeps
// the 50/min(Gamma) horizon integrable at the 0.1/||L|| step bound.
inline RandomConfig draw_oracle(std::mt19937_64& rng) {
    const double omega1 = uniform(rng, 0.45, 0.75);
    const double omega2 = uniform(rng, 0.25, 0.45);
    const auto resonant = static_cast<atoms::MachineTransition>(
        1 + static_cast<int>(uniform(rng, 0.0, 3.0 - 1e-12)));

    const double omega3 = omega1 + omega2;
    const double g1 = uniform(rng, 0.4, 1.2);
    const double g2 = uniform(rng, 0.4, 1.2);
    const double g3 = uniform(rng, 0.4, 1.2);
    const double gb = uniform(rng, 0.4, 1.2);
    auto machine = atoms::MachineSpec::make(
        omega1, omega2, g1 / (omega1 * omega1 * omega1), g2 / (omega2 * omega2 * omega2),
        g3 / (omega3 * omega3 * omega3), resonant);
    const double omega_b = machine.resonant_gap();
    auto system = atoms::SystemSpec::make(machine, gb / (omega_b * omega_b * omega_b),
                                          atoms::Geometry(1.0, 1.0));

    std::array<std::array<double, 2>, 4> weights;
    for (auto& w : weights) w = {uniform(rng, 0.6, 1.0), uniform(rng, 0.6, 1.0)};

    env::EnvironmentModel model;
    model.t_w = uniform(rng, 0.65, 1.0);
    model.t_s = uniform(rng, 0.65, 1.0);
    model.provider = std::make_shared<env::TwoTemperatureFlat>(weights);
    model.lambda_rule = env::LambdaRule::constant(uniform(rng, -0.2, 0.2));
    const double f = uniform(rng, 0.3, 0.9);
    model.xi = -1.0 / std::log(f);
    return {system, model};
}

// Documented defaults for the resonance-phenomenology scans.
inline env::EnvironmentModel toy_default_env(double t_w_kelvin = 300.0,
                                             double t_s_kelvin = 200.0) {
    env::EnvironmentModel model;
    model.t_w = units::from_kelvin(t_w_kelvin);
    model.t_s = units::from_kelvin(t_s_kelvin);
    model.provider = std::make_shared<env::ToyLorentzianSlab>();
    model.lambda_rule = env::LambdaRule::inverse_cube(500.0, 1.0);
    model.xi = 8.0;
    return model;
}

// Machine used in the temperature-vs-z figures: omega1 = 0.8, omega2 = 0.2,
// resonant through transition 2.
inline atoms::SystemSpec fig_system(double z_um = 1.0, double r_um = 1.0) {
    auto machine =
        atoms::MachineSpec::make(0.8, 0.2, 1.0, 1.0, 1.0, atoms::MachineTransition::T2);
    return atoms::SystemSpec::make(machine, 1.0, atoms::Geometry(z_um, r_um));
}

struct SolvedConfig {
    RandomConfig config;
    env::RateSet rates;
    dyn::Liouvillian liouvillian;
    dyn::StationaryState state;
};

inline SolvedConfig solve(const RandomConfig& config) {
    SolvedConfig out{config, env::rates(config.model, config.system), {}, {}};
    out.liouvillian = dyn::assemble(config.system, out.rates);
    out.state = dyn::steady_state(out.liouvillian, config.system);
    return out;
}

}  // namespace testsupport
