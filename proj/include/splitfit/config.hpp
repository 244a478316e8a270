#ifndef SPLITFIT_CONFIG_HPP
#define SPLITFIT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splitfit/grid.hpp"
#include "splitfit/model.hpp"
#include "splitfit/secant.hpp"

namespace splitfit {

/// Synthetic noise added on top of the simulated response.
struct NoiseSpec {
    enum class Kind { None, Gaussian, Uniform, Custom };
    Kind kind = Kind::None;
    double amplitude = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values; ///< Custom: one entry per sample

    std::vector<double> generate(std::size_t count) const;
};

/// Section request over a linearly entering parameter (run on the re-pinned
/// model).
struct LinearSectionSpec {
    std::size_t parameter_index = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 2;
    AxisSpacing spacing = AxisSpacing::Linear;
};

/// Secant starting simplex: explicit points or center + radius, in the free
/// space of the selected engine.
struct StartSpec {
    std::vector<std::vector<double>> points;
    std::vector<double> center;
    double radius = 0.0;

    std::vector<std::vector<double>> resolve(std::size_t dimension) const;
};

/// One configuration document fully reproduces a run.
struct RunConfig {
    std::string model_id;
    ModelDefinition model;

    std::optional<SamplingSchedule> schedule;
    std::map<std::string, double> truth;
    NoiseSpec noise;

    GridSpec grid;
    bool has_grid = false;
    std::vector<LinearSectionSpec> linear_sections;

    SolverOptions solver;
    StartSpec start;

    std::optional<double> analysis_level; ///< default: F(p_min)
    std::vector<std::vector<double>> probes;

    std::vector<std::filesystem::path> stage_files;
    std::size_t long_stage = 0;

    unsigned workers = 1;

    std::size_t parameter_index(const std::string& name) const;
    /// Truth assembled in model parameter order; throws when incomplete.
    std::vector<double> truth_vector() const;
};

RunConfig load_config(const std::filesystem::path& path);

} // namespace splitfit

#endif
