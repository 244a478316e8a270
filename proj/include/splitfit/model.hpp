#ifndef SPLITFIT_MODEL_HPP
#define SPLITFIT_MODEL_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitfit/matrix.hpp"

namespace splitfit {

/// Closed interval on a parameter axis.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
    double width() const { return hi - lo; }
};

/// Per-parameter closed intervals describing the compact admissible domain.
using Bounds = std::vector<Interval>;

/// Strictly increasing positive sampling times. The unit is a label declared
/// per dataset; all numerics treat times as plain reals.
class SamplingSchedule {
public:
    explicit SamplingSchedule(std::vector<double> times, std::string time_unit = "s");

    const std::vector<double>& times() const { return times_; }
    std::size_t size() const { return times_.size(); }
    const std::string& time_unit() const { return time_unit_; }

private:
    std::vector<double> times_;
    std::string time_unit_;
};

/// Measured (or simulated) data on a schedule.
struct DataSeries {
    DataSeries(SamplingSchedule schedule, std::vector<double> values,
               std::string value_unit = "");

    SamplingSchedule schedule;
    std::vector<double> values;
    std::string value_unit;
};

/// Direct-sum split of parameter indices into a linearly entering part and a
/// nonlinearly entering part. The two index lists partition 0..M-1; their
/// stored order defines the packing order of sub-vectors.
class ParameterSplit {
public:
    ParameterSplit(std::vector<std::size_t> linear, std::vector<std::size_t> nonlinear);

    static ParameterSplit all_linear(std::size_t m);
    static ParameterSplit all_nonlinear(std::size_t m);

    std::size_t parameter_count() const { return linear_.size() + nonlinear_.size(); }
    const std::vector<std::size_t>& linear_indices() const { return linear_; }
    const std::vector<std::size_t>& nonlinear_indices() const { return nonlinear_; }

    std::vector<double> pack_linear(std::span<const double> full) const;
    std::vector<double> pack_nonlinear(std::span<const double> full) const;
    /// Assembles a full values vector from the two packed parts.
    std::vector<double> assemble(std::span<const double> linear_part,
                                 std::span<const double> nonlinear_part) const;

private:
    std::vector<std::size_t> linear_;
    std::vector<std::size_t> nonlinear_;
};

/// Full parameter vector with its split and admissible box. Construction
/// validates that every value lies inside its interval; evaluation never
/// clamps.
class ParameterVector {
public:
    ParameterVector(std::vector<double> values, ParameterSplit split, Bounds bounds);

    const std::vector<double>& values() const { return values_; }
    const ParameterSplit& split() const { return split_; }
    const Bounds& bounds() const { return bounds_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    std::vector<double> linear_part() const { return split_.pack_linear(values_); }
    std::vector<double> nonlinear_part() const { return split_.pack_nonlinear(values_); }

private:
    std::vector<double> values_;
    ParameterSplit split_;
    Bounds bounds_;
};

/// Model abstraction: a scalar response u(t, p), optionally with a
/// partly-linear structure u = sum_j p1_j * basis_j(t, p2) + offset(t, p2).
///
/// `evaluate` receives the full values vector. `basis` receives the packed
/// nonlinear sub-vector and returns the k basis values in the packing order
/// of the linear indices. `offset` is an additive term independent of the
/// linear parameters; shipped models leave it empty (zero). It exists so a
/// linear parameter can be re-pinned as a scan axis (see repin_linear).
struct ModelDefinition {
    std::size_t parameter_count = 0;
    std::vector<std::string> parameter_names;
    ParameterSplit split = ParameterSplit::all_nonlinear(1);
    Bounds domain;
    std::function<double(double, std::span<const double>)> evaluate;
    std::function<std::vector<double>(double, std::span<const double>)> basis;
    std::function<double(double, std::span<const double>)> offset;

    bool has_basis() const { return static_cast<bool>(basis); }

    /// Wraps raw values into a bounds-checked ParameterVector for this model.
    ParameterVector make_point(std::vector<double> values) const;

    /// Throws InvalidArgument when sizes or split are inconsistent.
    void validate() const;
};

/// Error vector h(p) = f - u(p), same units as the data.
struct ResidualVector {
    std::vector<double> entries;
};

/// Model response sampled on a schedule. Throws EvaluationError with the
/// offending sample index when the model returns a non-finite value.
std::vector<double> response(const ModelDefinition& model, const ParameterVector& p,
                             const SamplingSchedule& schedule);

ResidualVector residual(const ModelDefinition& model, const ParameterVector& p,
                        const DataSeries& data);

/// Real-life merit F(p) = h(p)^T h(p).
double merit(const ModelDefinition& model, const ParameterVector& p, const DataSeries& data);

/// N x k matrix of basis_j(t_i, p2). Requires a partly-linear model.
DenseMatrix design_matrix(const ModelDefinition& model, std::span<const double> p2,
                          const SamplingSchedule& schedule);

/// Result of the conditional sub-minimization over the linear parameters at
/// fixed p2. `residual` is the data-minus-response vector at the assembled
/// point; section_value equals its norm squared.
struct Elimination {
    std::vector<double> linear_part;
    double section_value = 0.0;
    std::size_t effective_rank = 0;
    std::vector<double> residual;
};

/// Exact elimination of the linearly entering parameters: solves the
/// conditional least-squares problem at fixed p2 by the minimum-norm SVD
/// route and evaluates the section value there.
Elimination eliminate_linear(const ModelDefinition& model, std::span<const double> p2,
                             const DataSeries& data, double rank_tol = kDefaultRankTol);

/// Derived model where one linearly entering parameter becomes nonlinear.
/// Its basis column times the parameter value moves into the offset term, so
/// grid scans can section over it while the remaining linear parameters are
/// still eliminated exactly.
ModelDefinition repin_linear(const ModelDefinition& model, std::size_t parameter_index);

} // namespace splitfit

#endif
