#include "otesim/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "otesim/units.hpp"

namespace otesim::cli {

namespace {

using nlohmann::json;

double temp_field(const json& j, const std::string& key, double fallback) {
    if (j.contains(key)) return j.at(key).get<double>();
    if (j.contains(key + "_kelvin")) return units::from_kelvin(j.at(key + "_kelvin").get<double>());
    return fallback;
}

std::shared_ptr<const env::AlphaProvider> parse_provider(const json& j,
                                                         const std::string& base_dir) {
    const std::string type = j.value("type", "blackbody");
    if (type == "blackbody") return std::make_shared<env::EquilibriumBlackbody>();
    if (type == "flat") {
        if (!j.contains("alpha_w") && !j.contains("alpha_s"))
            return std::make_shared<env::TwoTemperatureFlat>();
        std::array<std::array<double, 2>, 4> w;
        const auto aw = j.value("alpha_w", std::vector<double>(4, 0.5));
        const auto as = j.value("alpha_s", std::vector<double>(4, 0.5));
        if (aw.size() != 4 || as.size() != 4)
            throw ConfigError("flat provider: alpha_w/alpha_s need 4 entries (channels 1,2,3,B)");
        for (int i = 0; i < 4; ++i) w[i] = {aw[i], as[i]};
        return std::make_shared<env::TwoTemperatureFlat>(w);
    }
    if (type == "toy_slab") {
        env::ToySlabParams p;
        p.amplitude = j.value("amplitude", p.amplitude);
        p.width = j.value("width", p.width);
        p.decay_length = j.value("decay_length_um", p.decay_length);
        p.resonance = j.value("resonance", p.resonance);
        return std::make_shared<env::ToyLorentzianSlab>(p);
    }
    if (type == "tabulated") {
        if (!j.contains("path")) throw ConfigError("tabulated provider: missing 'path'");
        std::filesystem::path p = j.at("path").get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        if (!std::filesystem::exists(p))
            throw ConfigError("tabulated provider: file does not exist: " + p.string());
        return std::make_shared<env::TabulatedAlpha>(env::TabulatedAlpha::from_csv(p.string()));
    }
    throw ConfigError("unknown provider type '" + type + "'");
}

env::LambdaRule parse_lambda_rule(const json& j) {
    const std::string type = j.value("type", "inverse_cube");
    if (type == "constant") return env::LambdaRule::constant(j.value("value", 0.0));
    if (type == "inverse_cube")
        return env::LambdaRule::inverse_cube(j.value("g", 500.0), j.value("r0_um", 1.0));
    throw ConfigError("unknown lambda_rule type '" + type + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    try {
        if (!j.contains("schema_version"))
            throw ConfigError("config: missing schema_version");
        if (j.at("schema_version").get<int>() != schema_version)
            throw ConfigError("config: unsupported schema_version");

        RunConfig cfg;

        const json sys = j.value("system", json::object());
        const double omega1 = sys.value("omega1", 0.8);
        const double omega2 = sys.value("omega2", 0.2);
        const int resonant = sys.value("resonant_transition", 2);
        if (resonant < 1 || resonant > 3)
            throw ConfigError("config: resonant_transition must be 1, 2 or 3");
        const json dip = sys.value("dipole_scales", json::object());
        cfg.dipole1 = dip.value("t1", 1.0);
        cfg.dipole2 = dip.value("t2", 1.0);
        cfg.dipole3 = dip.value("t3", 1.0);
        cfg.dipole_body = dip.value("body", 1.0);
        const json geo = sys.value("geometry", json::object());
        const atoms::Geometry geometry(geo.value("z_um", 1.0), geo.value("r_um", 1.0));
        auto machine = atoms::MachineSpec::make(omega1, omega2, cfg.dipole1, cfg.dipole2,
                                                cfg.dipole3,
                                                static_cast<atoms::MachineTransition>(resonant));
        if (sys.contains("omega3") &&
            sys.at("omega3").get<double>() != machine.omega3())
            throw ConfigError("config: omega3 violates the ladder rule omega3 = omega1 + omega2");
        if (sys.contains("omega_b") &&
            sys.at("omega_b").get<double>() != machine.resonant_gap())
            throw ConfigError("config: omega_b must equal the resonant machine gap");
        cfg.system = atoms::SystemSpec::make(machine, cfg.dipole_body, geometry);

        const json envj = j.value("environment", json::object());
        cfg.environment.t_w = temp_field(envj, "t_w", 0.5);
        cfg.environment.t_s = temp_field(envj, "t_s", 0.5);
        cfg.environment.provider = parse_provider(envj.value("provider", json::object()), base_dir);
        cfg.environment.lambda_rule = parse_lambda_rule(envj.value("lambda_rule", json::object()));
        cfg.environment.xi = envj.value("xi_um", 8.0);
        cfg.environment.validate();

        const json sol = j.value("solver", json::object());
        cfg.solver.tolerance = sol.value("tolerance", 1e-10);
        cfg.solver.degeneracy_threshold = sol.value("degeneracy_threshold", 1e-10);
        cfg.solver.negativity_limit = sol.value("negativity_limit", 1e-10);
        if (!(cfg.solver.tolerance > 0.0) || !(cfg.solver.degeneracy_threshold > 0.0) ||
            !(cfg.solver.negativity_limit > 0.0))
            throw ConfigError("config: solver tolerances must be positive");

        const json ev = j.value("evolve", json::object());
        if (ev.contains("t_final")) cfg.evolve.t_final = ev.at("t_final").get<double>();
        if (ev.contains("dt")) cfg.evolve.dt = ev.at("dt").get<double>();
        cfg.evolve.initial = ev.value("initial", "maximally_mixed");
        if (cfg.evolve.initial != "maximally_mixed" && cfg.evolve.initial != "ground")
            throw ConfigError("config: evolve.initial must be 'maximally_mixed' or 'ground'");
        cfg.evolve.trajectory_path = ev.value("trajectory_path", "");
        cfg.evolve.trajectory_points = ev.value("trajectory_points", 200);

        const json sc = j.value("scan", json::object());
        cfg.scan.z_min_um = sc.value("z_min_um", cfg.scan.z_min_um);
        cfg.scan.z_max_um = sc.value("z_max_um", cfg.scan.z_max_um);
        cfg.scan.z_points = sc.value("z_points", cfg.scan.z_points);
        cfg.scan.log_z = sc.value("log_z", cfg.scan.log_z);
        cfg.scan.dt_kelvin_min = sc.value("dt_kelvin_min", cfg.scan.dt_kelvin_min);
        cfg.scan.dt_kelvin_max = sc.value("dt_kelvin_max", cfg.scan.dt_kelvin_max);
        cfg.scan.dt_points = sc.value("dt_points", cfg.scan.dt_points);
        if (cfg.scan.z_points < 1 || cfg.scan.dt_points < 1 ||
            !(cfg.scan.z_min_um > 0.0) || cfg.scan.z_max_um < cfg.scan.z_min_um)
            throw ConfigError("config: invalid scan grid");

        const json sa = j.value("sample", json::object());
        cfg.sample.n = sa.value("n", cfg.sample.n);
        cfg.sample.seed = sa.value("seed", cfg.sample.seed);
        cfg.sample.ranges.z_min = sa.value("z_min_um", cfg.sample.ranges.z_min);
        cfg.sample.ranges.z_max = sa.value("z_max_um", cfg.sample.ranges.z_max);
        cfg.sample.ranges.t_w_min_k = sa.value("t_w_min_kelvin", cfg.sample.ranges.t_w_min_k);
        cfg.sample.ranges.t_w_max_k = sa.value("t_w_max_kelvin", cfg.sample.ranges.t_w_max_k);
        cfg.sample.ranges.t_s_span_k = sa.value("t_s_span_kelvin", cfg.sample.ranges.t_s_span_k);
        cfg.sample.omega2 = sa.value("omega2", cfg.sample.omega2);
        cfg.sample.omega1_max = sa.value("omega1_max", cfg.sample.omega1_max);
        cfg.sample.coarse_points = sa.value("coarse_points", cfg.sample.coarse_points);
        cfg.sample.trace_path = sa.value("trace_path", "");
        if (cfg.sample.n < 1) throw ConfigError("config: sample.n must be >= 1");

        const json out = j.value("output", json::object());
        cfg.output_path = out.value("path", "-");
        cfg.output_format = out.value("format", "json");
        if (cfg.output_format != "json" && cfg.output_format != "csv")
            throw ConfigError("config: output.format must be 'json' or 'csv'");
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const ConstraintViolation& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, std::filesystem::path(path).parent_path().string());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
    if (o.z_um || o.r_um) {
        const double z = o.z_um.value_or(cfg.system.geometry.z);
        const double r = o.r_um.value_or(cfg.system.geometry.r);
        cfg.system.geometry = atoms::Geometry(z, r);
    }
    if (o.t_w_kelvin) cfg.environment.t_w = units::from_kelvin(*o.t_w_kelvin);
    if (o.t_s_kelvin) cfg.environment.t_s = units::from_kelvin(*o.t_s_kelvin);
    if (o.sample_n) cfg.sample.n = *o.sample_n;
    if (o.seed) cfg.sample.seed = *o.seed;
    if (o.output_path) cfg.output_path = *o.output_path;
    cfg.environment.validate();
}

}  // namespace otesim::cli
