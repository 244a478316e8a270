#include "splitfit/config.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "splitfit/models.hpp"

namespace splitfit {

using nlohmann::json;

std::vector<double> NoiseSpec::generate(std::size_t count) const {
    std::vector<double> z(count, 0.0);
    switch (kind) {
        case Kind::None:
            break;
        case Kind::Gaussian: {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> dist(0.0, amplitude);
            for (double& v : z) v = dist(rng);
            break;
        }
        case Kind::Uniform: {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> dist(-amplitude, amplitude);
            for (double& v : z) v = dist(rng);
            break;
        }
        case Kind::Custom:
            if (values.size() != count)
                throw ConfigError("custom noise vector length " + std::to_string(values.size()) +
                                  " does not match the schedule length " + std::to_string(count));
            z = values;
            break;
    }
    return z;
}

std::vector<std::vector<double>> StartSpec::resolve(std::size_t dimension) const {
    if (!points.empty()) {
        for (const auto& p : points)
            if (p.size() != dimension)
                throw ConfigError("initial simplex point dimension " + std::to_string(p.size()) +
                                  " does not match the free parameter count " +
                                  std::to_string(dimension));
        if (points.size() != dimension + 1)
            throw ConfigError("initial simplex needs " + std::to_string(dimension + 1) +
                              " points, got " + std::to_string(points.size()));
        return points;
    }
    if (center.empty()) throw ConfigError("solver needs a start (simplex points or center+radius)");
    if (center.size() != dimension)
        throw ConfigError("start center dimension does not match the free parameter count");
    return axis_points(center, radius);
}

std::size_t RunConfig::parameter_index(const std::string& name) const {
    const auto& names = model.parameter_names;
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("model has no parameter named '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> RunConfig::truth_vector() const {
    std::vector<double> p(model.parameter_count);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto it = truth.find(model.parameter_names[i]);
        if (it == truth.end())
            throw ConfigError("truth is missing parameter '" + model.parameter_names[i] + "'");
        p[i] = it->second;
    }
    return p;
}

namespace {

AxisSpacing parse_spacing(const std::string& s) {
    if (s == "linear") return AxisSpacing::Linear;
    if (s == "log") return AxisSpacing::Log;
    throw ConfigError("unknown spacing '" + s + "' (use linear or log)");
}

Interval parse_interval(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(what + " must be a [lo, hi] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

ModelDefinition parse_model(const json& j, std::string& id) {
    const std::string kind = j.at("kind").get<std::string>();

    std::map<std::string, Interval> bounds;
    if (j.contains("bounds"))
        for (const auto& [name, v] : j.at("bounds").items())
            bounds[name] = parse_interval(v, "bound of '" + name + "'");

    if (kind == "appendix") {
        id = "appendix";
        Interval b{-100.0, 100.0};
        if (auto it = bounds.find("a"); it != bounds.end()) b = it->second;
        return make_appendix_model(b);
    }
    if (kind == "exponential") {
        id = "exponential";
        Interval amp{-1e6, 1e6}, rate{1e-6, 100.0};
        if (auto it = bounds.find("amplitude"); it != bounds.end()) amp = it->second;
        if (auto it = bounds.find("rate"); it != bounds.end()) rate = it->second;
        return make_exponential_model(amp, rate);
    }
    if (kind == "consolidation") {
        const ModelVersion version = parse_model_version(j.at("version").get<std::string>());
        id = "consolidation:" + to_string(version);
        const json& g = j.at("geometry");
        OedometerGeometry geom;
        geom.drainage_height = g.at("H").get<double>();
        geom.oedometric_modulus = g.at("E_oed").get<double>();
        if (g.contains("v0")) geom.displacement_load = g.at("v0").get<double>();
        VersionFixed fixed;
        if (j.contains("fixed") && j.at("fixed").contains("t1"))
            fixed.t1 = j.at("fixed").at("t1").get<double>();
        const std::size_t terms = j.value("terms", std::size_t{200});
        return build_model(version, geom, fixed, terms, bounds);
    }
    throw ConfigError("unknown model kind '" + kind + "'");
}

SamplingSchedule parse_schedule(const json& j) {
    if (j.contains("times")) {
        std::vector<double> t = j.at("times").get<std::vector<double>>();
        return SamplingSchedule(std::move(t), j.value("unit", std::string("s")));
    }
    const double start = j.at("start").get<double>();
    const double stop = j.at("stop").get<double>();
    const std::size_t count = j.at("count").get<std::size_t>();
    const AxisSpacing spacing = parse_spacing(j.value("spacing", std::string("linear")));
    if (count < 1) throw ConfigError("schedule count must be at least 1");
    GridAxis axis{0, start, stop, count, spacing};
    return SamplingSchedule(axis.values(), j.value("unit", std::string("s")));
}

NoiseSpec parse_noise(const json& j) {
    NoiseSpec n;
    const std::string kind = j.value("kind", std::string("none"));
    if (kind == "none")
        n.kind = NoiseSpec::Kind::None;
    else if (kind == "gaussian")
        n.kind = NoiseSpec::Kind::Gaussian;
    else if (kind == "uniform")
        n.kind = NoiseSpec::Kind::Uniform;
    else if (kind == "custom")
        n.kind = NoiseSpec::Kind::Custom;
    else
        throw ConfigError("unknown noise kind '" + kind + "'");
    n.amplitude = j.value("amplitude", 0.0);
    if (n.amplitude < 0.0) throw ConfigError("noise amplitude must be nonnegative");
    n.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("values")) n.values = j.at("values").get<std::vector<double>>();
    return n;
}

} // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }

    RunConfig cfg;
    try {
        cfg.model = parse_model(j.at("model"), cfg.model_id);

        if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"));

        if (j.contains("truth"))
            for (const auto& [name, v] : j.at("truth").items())
                cfg.truth[name] = v.get<double>();

        if (j.contains("noise")) cfg.noise = parse_noise(j.at("noise"));

        if (j.contains("grid")) {
            cfg.has_grid = true;
            for (const json& ja : j.at("grid").at("axes")) {
                GridAxis axis;
                const std::string name = ja.at("parameter").get<std::string>();
                const auto& names = cfg.model.parameter_names;
                const auto it = std::find(names.begin(), names.end(), name);
                if (it == names.end())
                    throw ConfigError("grid axis over unknown parameter '" + name + "'");
                axis.parameter_index = static_cast<std::size_t>(it - names.begin());
                axis.lo = ja.at("lo").get<double>();
                axis.hi = ja.at("hi").get<double>();
                axis.count = ja.at("count").get<std::size_t>();
                axis.spacing = parse_spacing(ja.value("spacing", std::string("linear")));
                cfg.grid.axes.push_back(axis);
            }
        }

        if (j.contains("sections") && j.at("sections").contains("linear_axes")) {
            for (const json& ja : j.at("sections").at("linear_axes")) {
                LinearSectionSpec s;
                const std::string name = ja.at("parameter").get<std::string>();
                const auto& names = cfg.model.parameter_names;
                const auto it = std::find(names.begin(), names.end(), name);
                if (it == names.end())
                    throw ConfigError("section over unknown parameter '" + name + "'");
                s.parameter_index = static_cast<std::size_t>(it - names.begin());
                s.lo = ja.at("lo").get<double>();
                s.hi = ja.at("hi").get<double>();
                s.count = ja.at("count").get<std::size_t>();
                s.spacing = parse_spacing(ja.value("spacing", std::string("linear")));
                cfg.linear_sections.push_back(s);
            }
        }

        if (j.contains("solver")) {
            const json& js = j.at("solver");
            const std::string variant = js.value("variant", std::string("modified"));
            if (variant == "wolfe")
                cfg.solver.variant = SecantVariant::Wolfe;
            else if (variant == "modified")
                cfg.solver.variant = SecantVariant::Modified;
            else
                throw ConfigError("unknown solver variant '" + variant + "'");
            cfg.solver.max_iterations = js.value("max_iterations", std::size_t{100});
            cfg.solver.merit_tolerance = js.value("merit_tolerance", 1e-12);
            cfg.solver.stagnation_tolerance = js.value("stagnation_tolerance", 1e-10);
            cfg.solver.rank_tol = js.value("rank_tolerance", kDefaultRankTol);
            const std::string policy = js.value("bounds_policy", std::string("project"));
            if (policy == "project")
                cfg.solver.bounds_policy = BoundsPolicy::Project;
            else if (policy == "reject")
                cfg.solver.bounds_policy = BoundsPolicy::Reject;
            else
                throw ConfigError("unknown bounds policy '" + policy + "'");
            cfg.solver.reject_worse = js.value("reject_worse", false);
            if (js.contains("initial_simplex"))
                cfg.start.points = js.at("initial_simplex").get<std::vector<std::vector<double>>>();
            if (js.contains("start")) {
                cfg.start.center = js.at("start").at("center").get<std::vector<double>>();
                cfg.start.radius = js.at("start").at("radius").get<double>();
            }
            cfg.solver.validate();
        }

        if (j.contains("analysis")) {
            const json& ja = j.at("analysis");
            if (ja.contains("level") && !ja.at("level").is_null())
                cfg.analysis_level = ja.at("level").get<double>();
            if (ja.contains("probes"))
                cfg.probes = ja.at("probes").get<std::vector<std::vector<double>>>();
        }

        if (j.contains("compression")) {
            const json& jc = j.at("compression");
            const auto dir = path.parent_path();
            for (const auto& s : jc.at("stages").get<std::vector<std::string>>()) {
                std::filesystem::path p(s);
                cfg.stage_files.push_back(p.is_absolute() ? p : dir / p);
            }
            cfg.long_stage = jc.at("long_stage").get<std::size_t>();
            if (cfg.long_stage >= cfg.stage_files.size())
                throw ConfigError("long_stage index out of range");
        }

        cfg.workers = j.value("workers", 1u);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return cfg;
}

} // namespace splitfit
