// environment.hpp — Dissipative rates and effective temperatures from a
// two-temperature field with a pluggable spectral-response provider.

#pragma once

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "otesim/atoms.hpp"
#include "otesim/errors.hpp"

namespace otesim::env {

using atoms::Geometry;
using atoms::MachineTransition;
using atoms::SystemSpec;

// Dissipation channels. T1..T3 are the machine transitions, Body the target
// atom, NonLocal the cross channel acting at omega_B.
enum class Channel : int { T1 = 0, T2 = 1, T3 = 2, Body = 3, NonLocal = 4 };

inline constexpr std::array<Channel, 4> local_channels{Channel::T1, Channel::T2, Channel::T3,
                                                       Channel::Body};

const char* channel_name(Channel c);

// Wall / slab response weights of one channel at one (omega, z).
// Local channels require real nonnegative values; the non-local channel may
// be complex within the geometric-mean physicality bound.
struct AlphaResponse {
    std::complex<double> alpha_w{1.0, 0.0};
    std::complex<double> alpha_s{0.0, 0.0};
};

// Pure function of (channel, omega, z) describing the field's spectral
// response. Implementations must be reentrant.
class AlphaProvider {
public:
    virtual ~AlphaProvider() = default;
    virtual AlphaResponse alpha(Channel channel, double omega, double z) const = 0;
    // True when the provider carries explicit non-local response data;
    // otherwise the geometric-mean rule builds the d-channel rates.
    virtual bool has_nonlocal_alpha() const { return false; }
    virtual std::string name() const = 0;
};

// alpha_w = 1, alpha_s = 0: every channel sees blackbody walls only.
class EquilibriumBlackbody final : public AlphaProvider {
public:
    AlphaResponse alpha(Channel, double, double) const override { return {1.0, 0.0}; }
    std::string name() const override { return "blackbody"; }
};

// Frequency- and position-independent per-channel weights. The default
// (1/2, 1/2) splits every channel evenly between walls and slab.
class TwoTemperatureFlat final : public AlphaProvider {
public:
    TwoTemperatureFlat() {
        weights_.fill({0.5, 0.5});
    }
    explicit TwoTemperatureFlat(std::array<std::array<double, 2>, 4> per_channel_ws)
        : weights_(per_channel_ws) {}

    AlphaResponse alpha(Channel channel, double, double) const override {
        const auto& w = weights_[static_cast<int>(channel) % 4];
        return {w[0], w[1]};
    }
    std::string name() const override { return "flat"; }

private:
    std::array<std::array<double, 2>, 4> weights_{};  // [channel]{alpha_w, alpha_s}
};

struct ToySlabParams {
    double amplitude{8.0};   // peak slab response at contact
    double width{0.06};      // Lorentzian half-width in units of omega_S
    double decay_length{3.0};  // evanescent decay length zeta, um
    double resonance{1.0};   // slab resonance, units of omega_S
};

// alpha_S = amplitude * exp(-z/zeta) * width^2 / ((omega - omega_S)^2 + width^2)
// alpha_W = 1 - min(alpha_S, 1) * (1 - 1e-6)
AlphaResponse toy_slab_alpha(double omega, double z, const ToySlabParams& params);

// Lorentzian slab resonance with evanescent z-decay. Stands in for
// material-data response functions; reproduces the resonance phenomenology.
class ToyLorentzianSlab final : public AlphaProvider {
public:
    ToyLorentzianSlab() = default;
    explicit ToyLorentzianSlab(ToySlabParams params);

    AlphaResponse alpha(Channel, double omega, double z) const override {
        return toy_slab_alpha(omega, z, params_);
    }
    std::string name() const override { return "toy_slab"; }
    const ToySlabParams& params() const { return params_; }

private:
    ToySlabParams params_{};
};

// Bilinear interpolation over a per-channel (omega, z) grid loaded from CSV:
//   channel,omega,z,alpha_w_re,alpha_w_im,alpha_s_re,alpha_s_im
// Out-of-range queries are hard errors.
class TabulatedAlpha final : public AlphaProvider {
public:
    static TabulatedAlpha from_csv(const std::string& path);
    static TabulatedAlpha from_string(const std::string& csv_text);

    AlphaResponse alpha(Channel channel, double omega, double z) const override;
    bool has_nonlocal_alpha() const override { return has_nonlocal_; }
    std::string name() const override { return "tabulated"; }

private:
    struct Table {
        std::vector<double> omegas;  // ascending
        std::vector<double> zs;      // ascending
        std::vector<std::complex<double>> alpha_w;  // row-major [omega][z]
        std::vector<std::complex<double>> alpha_s;
        bool present{false};
    };
    std::array<Table, 5> tables_{};
    bool has_nonlocal_{false};
};

// Rule producing the coherent coupling Lambda(omega_B).
struct LambdaRule {
    enum class Kind { Constant, InverseCube };
    Kind kind{Kind::InverseCube};
    double value{0.0};  // Constant: Lambda itself
    double g{500.0};    // InverseCube: Lambda = g * Gamma0_d * (r0 / r)^3
    double r0{1.0};     // um

    static LambdaRule constant(double v) { return {Kind::Constant, v, 0.0, 1.0}; }
    static LambdaRule inverse_cube(double g, double r0) { return {Kind::InverseCube, 0.0, g, r0}; }
};

// Two reservoir temperatures plus the response provider and the rules for
// the non-local channel.
struct EnvironmentModel {
    double t_w{0.5};  // wall temperature, natural units
    double t_s{0.5};  // slab temperature, natural units
    std::shared_ptr<const AlphaProvider> provider{std::make_shared<EquilibriumBlackbody>()};
    LambdaRule lambda_rule{};
    double xi{8.0};  // non-local coherence length, um: f(r) = exp(-r/xi)

    void validate() const {
        if (!(t_w > 0.0) || !(t_s > 0.0))
            throw ConstraintViolation("EnvironmentModel: temperatures must be > 0");
        if (!provider) throw ConstraintViolation("EnvironmentModel: provider missing");
        if (!(xi > 0.0)) throw ConstraintViolation("EnvironmentModel: xi must be > 0");
    }
};

// All dissipative rates of one configuration. Local channels are strictly
// real; the non-local pair may carry imaginary parts (flagged).
struct RateSet {
    std::array<double, 4> gamma0{};      // vacuum rates, channels T1..Body
    double gamma0_d{0.0};                // sqrt(Gamma0_B * Gamma0_r)
    std::array<double, 4> gamma_plus{};  // absorption-side rates
    std::array<double, 4> gamma_minus{};
    std::complex<double> gamma_d_plus{0.0};
    std::complex<double> gamma_d_minus{0.0};
    double lambda{0.0};                   // Lambda(omega_B)
    double coherence_factor{1.0};         // f(r)
    std::array<double, 4> env_temp{};     // T_i, NaN when the channel is dead
    double t_d{0.0};                      // non-local environmental temperature
    bool nonlocal_complex{false};         // NonHermitianNonlocal flag
    std::array<double, 4> omega{};        // channel frequencies
    double omega_d{0.0};                  // = omega_B

    double gp(Channel c) const { return gamma_plus[static_cast<int>(c)]; }
    double gm(Channel c) const { return gamma_minus[static_cast<int>(c)]; }
    double temp(Channel c) const {
        return c == Channel::NonLocal ? t_d : env_temp[static_cast<int>(c)];
    }
};

// Bose occupation 1/(exp(omega/t) - 1).
double photon_occupation(double omega, double t);

// Gamma0 = dipole_scale * omega^3 (material constants absorbed in the scale).
double vacuum_rate(const atoms::TransitionSpec& spec);

// T = omega / ln(Gamma+/Gamma-); exact bath temperature for equilibrium input.
double environmental_temperature(double gamma_plus, double gamma_minus, double omega);

// Evaluate every channel's rates, the coherent coupling and the effective
// environmental temperatures for one configuration.
RateSet rates(const EnvironmentModel& model, const SystemSpec& system);

}  // namespace otesim::env
