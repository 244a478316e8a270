#ifndef SPLITFIT_PIPELINE_HPP
#define SPLITFIT_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>

namespace splitfit::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitSolver = 4;

struct CommonArgs {
    std::filesystem::path config;
    std::filesystem::path data;
    std::filesystem::path out_dir = ".";
    std::string engine = "grid"; ///< grid | secant | secant-eliminated
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
};

/// simulate: model response at the configured truth plus seeded noise.
/// Writes data.csv and truth.json.
int run_simulate(const CommonArgs& args);

/// fit: runs the selected engine. Writes fit_report.json plus scan.csv (grid)
/// or trace.csv (secant engines). Solver failures still write the report and
/// return kExitSolver.
int run_fit(const CommonArgs& args);

/// sections: real-life and follower clever sections per parameter, one CSV
/// each. Needs a completed fit report in the output directory.
int run_sections(const CommonArgs& args);

/// analyze: noise decomposition, error intervals, similarity-band spot
/// checks and the merit-decomposition identity residual. Writes
/// analysis.json. Needs a completed fit report.
int run_analyze(const CommonArgs& args);

/// compression-curve: fits the configured long stage, then reads each
/// stage's asymptotic stress off its section at the long-stage c.
/// Writes compression_curve.csv and long_stage_fit.json.
int run_compression_curve(const CommonArgs& args);

} // namespace splitfit::cli

#endif
