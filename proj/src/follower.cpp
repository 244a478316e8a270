#include "splitfit/follower.hpp"

#include <algorithm>
#include <cmath>

namespace splitfit {

FollowerModel make_follower(const ModelDefinition& model, const ParameterVector& p_min,
                            const SamplingSchedule& schedule) {
    std::vector<double> sim = response(model, p_min, schedule);
    return {model, p_min, DataSeries(schedule, std::move(sim))};
}

std::vector<double> follower_residual(const FollowerModel& fm, const ParameterVector& p) {
    std::vector<double> u = response(fm.model, p, fm.simulated.schedule);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= fm.simulated.values[i];
    return u;
}

double follower_merit(const FollowerModel& fm, const ParameterVector& p) {
    const std::vector<double> h = follower_residual(fm, p);
    double f = 0.0;
    for (double e : h) f += e * e;
    return f;
}

NoiseVector noise_decompose(const FollowerModel& fm, const DataSeries& data) {
    if (data.schedule.times() != fm.simulated.schedule.times())
        throw DimensionError("data schedule does not match the follower schedule");
    NoiseVector z;
    z.entries.resize(data.values.size());
    for (std::size_t i = 0; i < data.values.size(); ++i) {
        z.entries[i] = data.values[i] - fm.simulated.values[i];
        z.norm_sq += z.entries[i] * z.entries[i];
    }
    return z;
}

MeritRelation merit_relation_check(const FollowerModel& fm, const DataSeries& data,
                                   const ParameterVector& p) {
    const NoiseVector z = noise_decompose(fm, data);
    const std::vector<double> h = follower_residual(fm, p);

    MeritRelation rel;
    rel.lhs = merit(fm.model, p, data);
    double cross = 0.0;
    double fprime = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        cross += h[i] * z.entries[i];
        fprime += h[i] * h[i];
    }
    rel.rhs = fprime - 2.0 * cross + z.norm_sq;
    return rel;
}

SimilarityBand similarity_band(const FollowerModel& fm, const NoiseVector& z,
                               const ParameterVector& p) {
    const std::vector<double> h = follower_residual(fm, p);
    double hh = 0.0;
    for (double e : h) hh += e * e;
    const double cross = 2.0 * std::sqrt(hh) * std::sqrt(z.norm_sq);
    return {-cross + z.norm_sq, cross + z.norm_sq};
}

bool in_similarity_domain(const FollowerModel& fm, const NoiseVector& z,
                          const ParameterVector& p) {
    return follower_merit(fm, p) > z.norm_sq;
}

double pseudometric(double merit_a, double merit_b) {
    if (!std::isfinite(merit_a) || !std::isfinite(merit_b))
        throw InvalidArgument("pseudometric needs finite merit values");
    return std::abs(merit_a - merit_b);
}

ErrorInterval error_domain_1d(const CleverSection& section, double level) {
    const auto& s = section.samples;
    if (s.empty()) throw InvalidArgument("section has no samples");
    if (!std::isfinite(level)) throw InvalidArgument("level must be finite");

    ErrorInterval out;
    out.parameter_index = section.parameter_index;
    out.level = level;

    std::size_t min_sample = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].value < s[min_sample].value) min_sample = i;

    auto cross = [&](std::size_t lo, std::size_t hi) {
        // Linear interpolation of the level crossing between two samples.
        const double f0 = s[lo].value, f1 = s[hi].value;
        const double x0 = s[lo].x, x1 = s[hi].x;
        return x0 + (level - f0) / (f1 - f0) * (x1 - x0);
    };

    // Maximal runs of samples at or below the level.
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i].value > level) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1].value <= level) ++j;
        const double left = (i == 0) ? s[0].x : cross(i - 1, i);
        const double right = (j + 1 == s.size()) ? s[j].x : cross(j, j + 1);
        out.intervals.push_back({left, right});
        if (i <= min_sample && min_sample <= j)
            out.minimizer_interval = out.intervals.size() - 1;
        i = j + 1;
    }

    if (out.minimizer_interval) {
        const Interval& iv = out.intervals[*out.minimizer_interval];
        out.half_width = iv.width() / 2.0;
    }
    return out;
}

double propose_step(const ErrorInterval& pilot) {
    if (pilot.empty() || !pilot.minimizer_interval)
        throw InvalidArgument("pilot error domain is empty; cannot propose a grid step");
    return pilot.half_width / 5.0;
}

} // namespace splitfit
