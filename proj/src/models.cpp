#include "splitfit/models.hpp"

#include <cmath>

namespace splitfit {

ModelDefinition make_appendix_model(Interval a_bounds) {
    ModelDefinition m;
    m.parameter_count = 1;
    m.parameter_names = {"a"};
    m.split = ParameterSplit::all_linear(1);
    m.domain = {a_bounds};
    m.evaluate = [](double t, std::span<const double> p) { return p[0] * t * t; };
    m.basis = [](double t, std::span<const double>) { return std::vector<double>{t * t}; };
    m.validate();
    return m;
}

ModelDefinition make_exponential_model(Interval amplitude_bounds, Interval rate_bounds) {
    ModelDefinition m;
    m.parameter_count = 2;
    m.parameter_names = {"amplitude", "rate"};
    m.split = ParameterSplit({0}, {1});
    m.domain = {amplitude_bounds, rate_bounds};
    m.evaluate = [](double t, std::span<const double> p) { return p[0] * std::exp(-p[1] * t); };
    m.basis = [](double t, std::span<const double> p2) {
        return std::vector<double>{std::exp(-p2[0] * t)};
    };
    m.validate();
    return m;
}

} // namespace splitfit
