#include "otesim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace otesim::env {

namespace {

constexpr double alpha_real_tol = 1e-12;

Channel channel_from_token(const std::string& token) {
    if (token == "1") return Channel::T1;
    if (token == "2") return Channel::T2;
    if (token == "3") return Channel::T3;
    if (token == "B" || token == "b") return Channel::Body;
    if (token == "d" || token == "D") return Channel::NonLocal;
    throw ConfigError("tabulated alpha: unknown channel '" + token + "'");
}

double require_real_nonneg(std::complex<double> a, Channel c, const char* which) {
    if (std::abs(a.imag()) > alpha_real_tol)
        throw UnphysicalAlpha(std::string("local alpha_") + which + " on channel " +
                              channel_name(c) + " has imaginary part beyond tolerance");
    if (a.real() < -alpha_real_tol)
        throw UnphysicalAlpha(std::string("local alpha_") + which + " on channel " +
                              channel_name(c) + " is negative");
    return std::max(a.real(), 0.0);
}

}  // namespace

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::T1: return "1";
        case Channel::T2: return "2";
        case Channel::T3: return "3";
        case Channel::Body: return "B";
        default: return "d";
    }
}

double photon_occupation(double omega, double t) {
    if (!(omega > 0.0)) throw DomainError("photon_occupation: omega must be > 0");
    if (!(t > 0.0)) throw DomainError("photon_occupation: temperature must be > 0");
    return 1.0 / std::expm1(omega / t);
}

double vacuum_rate(const atoms::TransitionSpec& spec) {
    const double w = spec.frequency;
    return spec.dipole_scale * w * w * w;
}

double environmental_temperature(double gamma_plus, double gamma_minus, double omega) {
    if (!(gamma_minus > 0.0) || !(gamma_plus > gamma_minus))
        throw DomainError("environmental_temperature: requires Gamma+ > Gamma- > 0");
    return omega / std::log(gamma_plus / gamma_minus);
}

AlphaResponse toy_slab_alpha(double omega, double z, const ToySlabParams& p) {
    if (!(p.amplitude > 0.0) || !(p.width > 0.0) || !(p.decay_length > 0.0))
        throw ConstraintViolation("toy_slab_alpha: parameters must be positive");
    const double detune = omega - p.resonance;
    const double lorentz = p.width * p.width / (detune * detune + p.width * p.width);
    const double alpha_s = p.amplitude * std::exp(-z / p.decay_length) * lorentz;
    const double alpha_w = 1.0 - std::min(alpha_s, 1.0) * (1.0 - 1e-6);
    return {alpha_w, alpha_s};
}

ToyLorentzianSlab::ToyLorentzianSlab(ToySlabParams params) : params_(params) {
    if (!(params_.amplitude > 0.0) || !(params_.width > 0.0) || !(params_.decay_length > 0.0))
        throw ConstraintViolation("ToyLorentzianSlab: parameters must be positive");
}

TabulatedAlpha TabulatedAlpha::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("tabulated alpha: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

TabulatedAlpha TabulatedAlpha::from_string(const std::string& csv_text) {
    struct Point {
        double omega, z;
        std::complex<double> aw, as;
    };
    std::array<std::vector<Point>, 5> points;

    std::istringstream in(csv_text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("channel,", 0) == 0) continue;  // header row
        }
        std::istringstream row(line);
        std::string tok;
        std::array<std::string, 7> cols;
        for (auto& c : cols) {
            if (!std::getline(row, tok, ',')) throw ConfigError("tabulated alpha: short row: " + line);
            c = tok;
        }
        Channel ch = channel_from_token(cols[0]);
        Point p;
        p.omega = std::stod(cols[1]);
        p.z = std::stod(cols[2]);
        p.aw = {std::stod(cols[3]), std::stod(cols[4])};
        p.as = {std::stod(cols[5]), std::stod(cols[6])};
        points[static_cast<int>(ch)].push_back(p);
    }

    TabulatedAlpha tab;
    for (int ci = 0; ci < 5; ++ci) {
        auto& pts = points[ci];
        if (pts.empty()) continue;
        Table& t = tab.tables_[ci];
        std::vector<double> omegas, zs;
        for (const auto& p : pts) {
            omegas.push_back(p.omega);
            zs.push_back(p.z);
        }
        auto uniq = [](std::vector<double>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        uniq(omegas);
        uniq(zs);
        if (pts.size() != omegas.size() * zs.size())
            throw ConfigError(std::string("tabulated alpha: channel ") +
                              channel_name(static_cast<Channel>(ci)) +
                              " is not a complete (omega, z) grid");
        t.omegas = omegas;
        t.zs = zs;
        t.alpha_w.assign(pts.size(), {});
        t.alpha_s.assign(pts.size(), {});
        std::map<std::pair<double, double>, std::pair<std::complex<double>, std::complex<double>>> by_key;
        for (const auto& p : pts) by_key[{p.omega, p.z}] = {p.aw, p.as};
        if (by_key.size() != pts.size())
            throw ConfigError("tabulated alpha: duplicate (channel, omega, z) rows");
        for (std::size_t i = 0; i < omegas.size(); ++i)
            for (std::size_t j = 0; j < zs.size(); ++j) {
                auto it = by_key.find({omegas[i], zs[j]});
                if (it == by_key.end())
                    throw ConfigError("tabulated alpha: missing grid node");
                t.alpha_w[i * zs.size() + j] = it->second.first;
                t.alpha_s[i * zs.size() + j] = it->second.second;
            }
        t.present = true;
    }
    for (Channel c : local_channels)
        if (!tab.tables_[static_cast<int>(c)].present)
            throw ConfigError(std::string("tabulated alpha: missing rows for local channel ") +
                              channel_name(c));
    tab.has_nonlocal_ = tab.tables_[static_cast<int>(Channel::NonLocal)].present;
    return tab;
}

AlphaResponse TabulatedAlpha::alpha(Channel channel, double omega, double z) const {
    const Table& t = tables_[static_cast<int>(channel)];
    if (!t.present)
        throw DomainError(std::string("tabulated alpha: no data for channel ") +
                          channel_name(channel));
    auto locate = [](const std::vector<double>& grid, double x, const char* axis) {
        if (x < grid.front() || x > grid.back())
            throw DomainError(std::string("tabulated alpha: ") + axis + " out of table range");
        std::size_t hi = std::lower_bound(grid.begin(), grid.end(), x) - grid.begin();
        if (hi == 0) hi = 1;
        if (hi == grid.size()) hi = grid.size() - 1;
        return hi;
    };
    // Single-node axes behave as constants along that axis.
    if (t.omegas.size() == 1 && t.zs.size() == 1) {
        if (omega != t.omegas[0] || z != t.zs[0])
            throw DomainError("tabulated alpha: query outside single-node table");
        return {t.alpha_w[0], t.alpha_s[0]};
    }
    auto interp = [&](const std::vector<std::complex<double>>& grid) {
        if (t.omegas.size() == 1) {
            const std::size_t j = locate(t.zs, z, "z");
            const double u = (z - t.zs[j - 1]) / (t.zs[j] - t.zs[j - 1]);
            return grid[j - 1] * (1.0 - u) + grid[j] * u;
        }
        if (t.zs.size() == 1) {
            const std::size_t i = locate(t.omegas, omega, "omega");
            const double u = (omega - t.omegas[i - 1]) / (t.omegas[i] - t.omegas[i - 1]);
            return grid[i - 1] * (1.0 - u) + grid[i] * u;
        }
        const std::size_t i = locate(t.omegas, omega, "omega");
        const std::size_t j = locate(t.zs, z, "z");
        const double u = (omega - t.omegas[i - 1]) / (t.omegas[i] - t.omegas[i - 1]);
        const double v = (z - t.zs[j - 1]) / (t.zs[j] - t.zs[j - 1]);
        const std::size_t nz = t.zs.size();
        const auto f00 = grid[(i - 1) * nz + (j - 1)];
        const auto f01 = grid[(i - 1) * nz + j];
        const auto f10 = grid[i * nz + (j - 1)];
        const auto f11 = grid[i * nz + j];
        return f00 * (1 - u) * (1 - v) + f01 * (1 - u) * v + f10 * u * (1 - v) + f11 * u * v;
    };
    return {interp(t.alpha_w), interp(t.alpha_s)};
}

RateSet rates(const EnvironmentModel& model, const SystemSpec& system) {
    model.validate();
    const double z = system.geometry.z;
    const double r = system.geometry.r;

    RateSet rs;
    rs.omega = {system.machine.omega1(), system.machine.omega2(), system.machine.omega3(),
                system.omega_b()};
    rs.omega_d = system.omega_b();

    const std::array<const atoms::TransitionSpec*, 4> specs = {
        &system.machine.transitions[0], &system.machine.transitions[1],
        &system.machine.transitions[2], &system.body.transition};

    for (int ci = 0; ci < 4; ++ci) {
        const Channel c = static_cast<Channel>(ci);
        const double w = rs.omega[ci];
        rs.gamma0[ci] = vacuum_rate(*specs[ci]);
        const AlphaResponse a = model.provider->alpha(c, w, z);
        const double aw = require_real_nonneg(a.alpha_w, c, "w");
        const double as = require_real_nonneg(a.alpha_s, c, "s");
        const double nw = photon_occupation(w, model.t_w);
        const double ns = photon_occupation(w, model.t_s);
        rs.gamma_plus[ci] = rs.gamma0[ci] * ((1.0 + nw) * aw + (1.0 + ns) * as);
        rs.gamma_minus[ci] = rs.gamma0[ci] * (nw * aw + ns * as);
        if (rs.gamma_plus[ci] > rs.gamma_minus[ci] && rs.gamma_minus[ci] > 0.0)
            rs.env_temp[ci] = environmental_temperature(rs.gamma_plus[ci], rs.gamma_minus[ci], w);
        else
            rs.env_temp[ci] = std::numeric_limits<double>::quiet_NaN();
    }

    const int ri = static_cast<int>(system.machine.resonant) - 1;
    rs.gamma0_d = std::sqrt(rs.gamma0[static_cast<int>(Channel::Body)] * rs.gamma0[ri]);
    rs.coherence_factor = std::exp(-r / model.xi);

    if (model.provider->has_nonlocal_alpha()) {
        const AlphaResponse ad = model.provider->alpha(Channel::NonLocal, rs.omega_d, z);
        const AlphaResponse ab = model.provider->alpha(Channel::Body, rs.omega_d, z);
        const AlphaResponse ar = model.provider->alpha(static_cast<Channel>(ri), rs.omega[ri], z);
        // Cauchy-Schwarz-like physicality bound against the local responses
        // of the two resonant transitions.
        const double bound_w = std::sqrt(ab.alpha_w.real() * ar.alpha_w.real());
        const double bound_s = std::sqrt(ab.alpha_s.real() * ar.alpha_s.real());
        if (std::abs(ad.alpha_w) > bound_w + 1e-9 || std::abs(ad.alpha_s) > bound_s + 1e-9)
            throw UnphysicalAlpha("non-local alpha exceeds the geometric-mean bound");
        const double nw = photon_occupation(rs.omega_d, model.t_w);
        const double ns = photon_occupation(rs.omega_d, model.t_s);
        rs.gamma_d_plus = rs.gamma0_d * ((1.0 + nw) * ad.alpha_w + (1.0 + ns) * ad.alpha_s);
        rs.gamma_d_minus =
            rs.gamma0_d * (nw * std::conj(ad.alpha_w) + ns * std::conj(ad.alpha_s));
    } else {
        // Geometric-mean rule: Gamma_d+- = f(r) sqrt(Gamma_B+- Gamma_r+-).
        rs.gamma_d_plus = rs.coherence_factor *
                          std::sqrt(rs.gamma_plus[static_cast<int>(Channel::Body)] * rs.gamma_plus[ri]);
        rs.gamma_d_minus = rs.coherence_factor *
                           std::sqrt(rs.gamma_minus[static_cast<int>(Channel::Body)] * rs.gamma_minus[ri]);
    }

    const double gd_mag = std::max(std::abs(rs.gamma_d_plus), std::abs(rs.gamma_d_minus));
    rs.nonlocal_complex =
        gd_mag > 0.0 && (std::abs(rs.gamma_d_plus.imag()) > 1e-10 * gd_mag ||
                         std::abs(rs.gamma_d_minus.imag()) > 1e-10 * gd_mag);

    if (!rs.nonlocal_complex && rs.gamma_d_minus.real() > 0.0 &&
        rs.gamma_d_plus.real() > rs.gamma_d_minus.real())
        rs.t_d = environmental_temperature(rs.gamma_d_plus.real(), rs.gamma_d_minus.real(),
                                           rs.omega_d);
    else
        rs.t_d = std::numeric_limits<double>::quiet_NaN();

    switch (model.lambda_rule.kind) {
        case LambdaRule::Kind::Constant:
            rs.lambda = model.lambda_rule.value;
            break;
        case LambdaRule::Kind::InverseCube: {
            const double ratio = model.lambda_rule.r0 / r;
            rs.lambda = model.lambda_rule.g * rs.gamma0_d * ratio * ratio * ratio;
            break;
        }
    }
    if (!std::isfinite(rs.lambda)) throw DomainError("rates: Lambda is not finite");
    return rs;
}

}  // namespace otesim::env
