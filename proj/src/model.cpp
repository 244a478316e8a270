#include "splitfit/model.hpp"

#include <algorithm>
#include <cmath>

namespace splitfit {

SamplingSchedule::SamplingSchedule(std::vector<double> times, std::string time_unit)
    : times_(std::move(times)), time_unit_(std::move(time_unit)) {
    if (times_.empty()) throw InvalidArgument("sampling schedule needs at least one time");
    double prev = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        const double t = times_[i];
        if (!std::isfinite(t)) throw InvalidArgument("sampling time is not finite");
        if (t <= prev)
            throw InvalidArgument("sampling times must be strictly increasing and positive, index " +
                                  std::to_string(i));
        prev = t;
    }
}

DataSeries::DataSeries(SamplingSchedule schedule_, std::vector<double> values_,
                       std::string value_unit_)
    : schedule(std::move(schedule_)), values(std::move(values_)), value_unit(std::move(value_unit_)) {
    if (values.size() != schedule.size())
        throw DimensionError("data length does not match schedule length");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidArgument("data series has non-finite values");
}

ParameterSplit::ParameterSplit(std::vector<std::size_t> linear, std::vector<std::size_t> nonlinear)
    : linear_(std::move(linear)), nonlinear_(std::move(nonlinear)) {
    const std::size_t m = linear_.size() + nonlinear_.size();
    if (m == 0) throw InvalidArgument("parameter split over zero parameters");
    std::vector<char> seen(m, 0);
    auto mark = [&](const std::vector<std::size_t>& idx) {
        for (std::size_t i : idx) {
            if (i >= m) throw InvalidArgument("split index out of range");
            if (seen[i]) throw InvalidArgument("split index appears twice");
            seen[i] = 1;
        }
    };
    mark(linear_);
    mark(nonlinear_);
}

ParameterSplit ParameterSplit::all_linear(std::size_t m) {
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    return {std::move(idx), {}};
}

ParameterSplit ParameterSplit::all_nonlinear(std::size_t m) {
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    return {{}, std::move(idx)};
}

std::vector<double> ParameterSplit::pack_linear(std::span<const double> full) const {
    std::vector<double> out(linear_.size());
    for (std::size_t j = 0; j < linear_.size(); ++j) out[j] = full[linear_[j]];
    return out;
}

std::vector<double> ParameterSplit::pack_nonlinear(std::span<const double> full) const {
    std::vector<double> out(nonlinear_.size());
    for (std::size_t j = 0; j < nonlinear_.size(); ++j) out[j] = full[nonlinear_[j]];
    return out;
}

std::vector<double> ParameterSplit::assemble(std::span<const double> linear_part,
                                             std::span<const double> nonlinear_part) const {
    if (linear_part.size() != linear_.size() || nonlinear_part.size() != nonlinear_.size())
        throw DimensionError("sub-vector lengths do not match the split");
    std::vector<double> full(parameter_count());
    for (std::size_t j = 0; j < linear_.size(); ++j) full[linear_[j]] = linear_part[j];
    for (std::size_t j = 0; j < nonlinear_.size(); ++j) full[nonlinear_[j]] = nonlinear_part[j];
    return full;
}

ParameterVector::ParameterVector(std::vector<double> values, ParameterSplit split, Bounds bounds)
    : values_(std::move(values)), split_(std::move(split)), bounds_(std::move(bounds)) {
    if (values_.empty()) throw InvalidArgument("parameter vector must have at least one entry");
    if (values_.size() != split_.parameter_count())
        throw DimensionError("parameter count does not match split");
    if (bounds_.size() != values_.size())
        throw DimensionError("bounds count does not match parameter count");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw InvalidArgument("parameter " + std::to_string(i) + " is not finite");
        if (!bounds_[i].contains(values_[i]))
            throw InvalidArgument("parameter " + std::to_string(i) + " = " +
                                  std::to_string(values_[i]) + " outside [" +
                                  std::to_string(bounds_[i].lo) + ", " +
                                  std::to_string(bounds_[i].hi) + "]");
    }
}

ParameterVector ModelDefinition::make_point(std::vector<double> values) const {
    return {std::move(values), split, domain};
}

void ModelDefinition::validate() const {
    if (parameter_count == 0) throw InvalidArgument("model has no parameters");
    if (split.parameter_count() != parameter_count)
        throw InvalidArgument("model split does not cover the parameter count");
    if (domain.size() != parameter_count)
        throw InvalidArgument("model domain does not cover the parameter count");
    if (!parameter_names.empty() && parameter_names.size() != parameter_count)
        throw InvalidArgument("parameter name list has the wrong length");
    if (!evaluate) throw InvalidArgument("model has no evaluate function");
}

std::vector<double> response(const ModelDefinition& model, const ParameterVector& p,
                             const SamplingSchedule& schedule) {
    std::vector<double> out(schedule.size());
    const auto& t = schedule.times();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = model.evaluate(t[i], p.values());
        if (!std::isfinite(v))
            throw EvaluationError("model produced a non-finite value at sample " +
                                      std::to_string(i) + " (t = " + std::to_string(t[i]) + ")",
                                  i, t[i]);
        out[i] = v;
    }
    return out;
}

ResidualVector residual(const ModelDefinition& model, const ParameterVector& p,
                        const DataSeries& data) {
    std::vector<double> u = response(model, p, data.schedule);
    ResidualVector h;
    h.entries.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) h.entries[i] = data.values[i] - u[i];
    return h;
}

double merit(const ModelDefinition& model, const ParameterVector& p, const DataSeries& data) {
    const ResidualVector h = residual(model, p, data);
    double f = 0.0;
    for (double e : h.entries) f += e * e;
    return f;
}

DenseMatrix design_matrix(const ModelDefinition& model, std::span<const double> p2,
                          const SamplingSchedule& schedule) {
    if (!model.has_basis()) throw InvalidArgument("model has no partly-linear basis");
    if (p2.size() != model.split.nonlinear_indices().size())
        throw DimensionError("nonlinear sub-vector length does not match the split");
    const std::size_t k = model.split.linear_indices().size();
    const auto& t = schedule.times();
    DenseMatrix a(t.size(), k);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::vector<double> row = model.basis(t[i], p2);
        if (row.size() != k) throw DimensionError("basis returned the wrong number of columns");
        for (std::size_t j = 0; j < k; ++j) {
            if (!std::isfinite(row[j]))
                throw EvaluationError("basis produced a non-finite value at sample " +
                                          std::to_string(i),
                                      i, t[i]);
            a(i, j) = row[j];
        }
    }
    return a;
}

Elimination eliminate_linear(const ModelDefinition& model, std::span<const double> p2,
                             const DataSeries& data, double rank_tol) {
    if (!model.has_basis()) throw InvalidArgument("model has no partly-linear basis");

    std::vector<double> rhs = data.values;
    if (model.offset) {
        const auto& t = data.schedule.times();
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double g = model.offset(t[i], p2);
            if (!std::isfinite(g))
                throw EvaluationError("offset produced a non-finite value at sample " +
                                          std::to_string(i),
                                      i, t[i]);
            rhs[i] -= g;
        }
    }

    Elimination out;
    if (model.split.linear_indices().empty()) {
        // Nothing to eliminate (fully re-pinned model): the section value is
        // the plain merit at p2.
        out.residual = std::move(rhs);
        for (double r : out.residual) out.section_value += r * r;
        return out;
    }

    const DenseMatrix a = design_matrix(model, p2, data.schedule);
    const LsqSolution sol = lstsq_min_norm(a, rhs, rank_tol);

    out.linear_part = sol.solution;
    out.effective_rank = sol.effective_rank;
    out.residual.resize(rhs.size());
    double f = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        double r = rhs[i];
        for (std::size_t j = 0; j < a.cols(); ++j) r -= a(i, j) * sol.solution[j];
        out.residual[i] = r;
        f += r * r;
    }
    out.section_value = f;
    return out;
}

ModelDefinition repin_linear(const ModelDefinition& model, std::size_t parameter_index) {
    if (!model.has_basis()) throw InvalidArgument("repin_linear needs a partly-linear model");
    const auto& lin = model.split.linear_indices();
    const auto it = std::find(lin.begin(), lin.end(), parameter_index);
    if (it == lin.end())
        throw InvalidArgument("parameter " + std::to_string(parameter_index) +
                              " is not a linear parameter");
    const std::size_t column = static_cast<std::size_t>(it - lin.begin());

    std::vector<std::size_t> new_linear;
    for (std::size_t i : lin)
        if (i != parameter_index) new_linear.push_back(i);
    std::vector<std::size_t> new_nonlinear = model.split.nonlinear_indices();
    new_nonlinear.push_back(parameter_index);
    const std::size_t old_nl = model.split.nonlinear_indices().size();

    ModelDefinition out = model;
    out.split = ParameterSplit(std::move(new_linear), std::move(new_nonlinear));

    auto old_basis = model.basis;
    auto old_offset = model.offset;
    out.basis = [old_basis, column, old_nl](double t, std::span<const double> p2) {
        const std::span<const double> inner = p2.first(old_nl);
        std::vector<double> row = old_basis(t, inner);
        row.erase(row.begin() + static_cast<std::ptrdiff_t>(column));
        return row;
    };
    out.offset = [old_basis, old_offset, column, old_nl](double t, std::span<const double> p2) {
        const std::span<const double> inner = p2.first(old_nl);
        const double pinned = p2[old_nl];
        double g = old_basis(t, inner)[column] * pinned;
        if (old_offset) g += old_offset(t, inner);
        return g;
    };
    return out;
}

} // namespace splitfit
