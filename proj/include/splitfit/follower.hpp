#ifndef SPLITFIT_FOLLOWER_HPP
#define SPLITFIT_FOLLOWER_HPP

#include <optional>
#include <vector>

#include "splitfit/grid.hpp"
#include "splitfit/model.hpp"

namespace splitfit {

/// Identified minimizer plus the noise-free data simulated at it. The
/// follower merit built from these is the best noiseless approximation of
/// the real-life merit.
struct FollowerModel {
    ModelDefinition model;
    ParameterVector p_min;
    DataSeries simulated;
};

/// Simulates the noise-free data at p_min on the given schedule.
FollowerModel make_follower(const ModelDefinition& model, const ParameterVector& p_min,
                            const SamplingSchedule& schedule);

/// Follower residual u(t_i, p) - u(t_i, p_min) (model response minus the
/// simulated data; only its norm enters the band bounds).
std::vector<double> follower_residual(const FollowerModel& fm, const ParameterVector& p);

/// F'(p) = sum_i [u(t_i, p) - u(t_i, p_min)]^2.
double follower_merit(const FollowerModel& fm, const ParameterVector& p);

/// Noise relative to the identified minimizer: z_i = f_i - u(t_i, p_min).
struct NoiseVector {
    std::vector<double> entries;
    double norm_sq = 0.0;
};

NoiseVector noise_decompose(const FollowerModel& fm, const DataSeries& data);

/// Both sides of the exact decomposition
/// F(p) = F'(p) - 2 sum_i h'_i(p) z_i + F(p_min).
struct MeritRelation {
    double lhs = 0.0;
    double rhs = 0.0;
};

MeritRelation merit_relation_check(const FollowerModel& fm, const DataSeries& data,
                                   const ParameterVector& p);

/// Two-sided bound on F(p) - F'(p); width is exactly 4 ||h'(p)|| ||z||.
struct SimilarityBand {
    double lower = 0.0;
    double upper = 0.0;
};

SimilarityBand similarity_band(const FollowerModel& fm, const NoiseVector& z,
                               const ParameterVector& p);

/// True iff ||h'(p)||^2 > ||z||^2 (the follower residual dominates the noise).
bool in_similarity_domain(const FollowerModel& fm, const NoiseVector& z,
                          const ParameterVector& p);

/// |F(a) - F(b)|. All metric axioms except identity of indiscernibles.
double pseudometric(double merit_a, double merit_b);

/// Sublevel set of a one-dimensional section: the per-parameter view of the
/// parameter error domain. Endpoints are refined by linear interpolation
/// between neighboring samples. When the sublevel set is disconnected, all
/// intervals are reported and the one holding the section minimizer is
/// flagged; half_width is half that interval's width.
struct ErrorInterval {
    std::size_t parameter_index = 0;
    double level = 0.0;
    std::vector<Interval> intervals;
    double half_width = 0.0;
    std::optional<std::size_t> minimizer_interval;

    bool empty() const { return intervals.empty(); }
};

/// Level below the sampled minimum yields an explicit empty result.
ErrorInterval error_domain_1d(const CleverSection& section, double level);

/// Grid-step suggestion from a pilot section's error half-width.
double propose_step(const ErrorInterval& pilot);

} // namespace splitfit

#endif
