#ifndef SPLITFIT_TESTS_FIXTURES_HPP
#define SPLITFIT_TESTS_FIXTURES_HPP

#include <vector>

#include "splitfit/models.hpp"

namespace fixtures {

inline splitfit::SamplingSchedule appendix_schedule() {
    return splitfit::SamplingSchedule({1.0, 2.0, 3.0});
}

inline splitfit::DataSeries appendix_data() {
    return {appendix_schedule(), {2.1, 7.8, 18.2}};
}

/// Identified minimizer of the worked example, full precision.
inline double appendix_a_min() { return 197.1 / 98.0; }

/// Merit at the identified minimizer.
inline double appendix_f_min() { return 396.49 - 197.1 * 197.1 / 98.0; }

inline splitfit::SamplingSchedule exp_schedule(std::size_t n = 25, double lo = 0.1,
                                               double hi = 10.0) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return splitfit::SamplingSchedule(std::move(t));
}

inline splitfit::DataSeries exp_data(double amplitude, double rate,
                                     const splitfit::SamplingSchedule& schedule) {
    std::vector<double> v(schedule.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = amplitude * std::exp(-rate * schedule.times()[i]);
    return {schedule, std::move(v)};
}

} // namespace fixtures

#endif
