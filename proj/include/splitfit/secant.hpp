#ifndef SPLITFIT_SECANT_HPP
#define SPLITFIT_SECANT_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "splitfit/model.hpp"

namespace splitfit {

using ResidualFn = std::function<std::vector<double>(std::span<const double>)>;

/// n+1 trial points with their residual vectors and merits. Index 0 is the
/// trial with the smallest merit (base-point convention); the step is always
/// taken from it.
class SecantSimplex {
public:
    /// Evaluates every trial and rotates the best to the front. Throws
    /// DegenerateSimplexError on duplicate trial points, DimensionError when
    /// the residual is shorter than the parameter count.
    static SecantSimplex make(std::vector<std::vector<double>> points,
                              const ResidualFn& residual_fn);

    /// Same, from pre-evaluated residuals.
    static SecantSimplex from_evaluated(std::vector<std::vector<double>> points,
                                        std::vector<std::vector<double>> residuals);

    std::size_t dimension() const { return points_.empty() ? 0 : points_[0].size(); }
    std::size_t residual_size() const { return residuals_.empty() ? 0 : residuals_[0].size(); }

    const std::vector<std::vector<double>>& points() const { return points_; }
    const std::vector<std::vector<double>>& residuals() const { return residuals_; }
    const std::vector<double>& merits() const { return merits_; }

    const std::vector<double>& base_point() const { return points_[0]; }
    const std::vector<double>& base_residual() const { return residuals_[0]; }
    double base_merit() const { return merits_[0]; }

    std::size_t worst_index() const;
    /// Replaces one trial and restores the base-point convention.
    void replace(std::size_t index, std::vector<double> point, std::vector<double> residual);

private:
    SecantSimplex() = default;
    void rotate_best_front();

    std::vector<std::vector<double>> points_;
    std::vector<std::vector<double>> residuals_;
    std::vector<double> merits_;
};

/// Center plus axis displacements: the usual starting simplex.
std::vector<std::vector<double>> axis_points(std::span<const double> center, double radius);

/// Per-step bookkeeping exported to the trace CSV.
struct StepReport {
    std::size_t iteration = 0;
    std::string action;
    std::vector<double> q;
    std::vector<double> q2;
    double merit_base = 0.0;
    double merit_new = std::numeric_limits<double>::infinity();
    double merit_second = std::numeric_limits<double>::infinity();
    double step_norm = 0.0;
    std::vector<double> singular_values; ///< of the residual-difference matrix
    bool bound_projection = false;
    bool tr_fallback = false;
    bool zero_displacement = false;
};

struct WolfeStep {
    std::vector<double> p_new;
    StepReport report;
};

/// One simultaneous secant step: q is the minimum-norm least-squares solution
/// of [h(p_0)-h(p_i)] q = -h(p_0); the new point is p_0 + [p_0-p_i] q.
/// Reduces to the classical secant update in 1D and lands on the
/// least-squares minimizer in one step for affine residuals with full-rank
/// directions. Throws DegenerateSimplexError when the residual-difference
/// matrix drops below full rank at rank_tol.
WolfeStep wolfe_step(const SecantSimplex& simplex, double rank_tol = kDefaultRankTol);

/// Second trial of the amended method. The residual row determines q2 from
/// T_r [h(p_0)-h(p_i)] q2 = h(p_0) with t_r^i = h^i(p_new)/h^i(p_0); the
/// parameter row then fixes p_second componentwise. tr_defined is false when
/// some h^i(p_0) vanishes (caller falls back to the plain update).
struct ModifiedStep {
    bool tr_defined = false;
    std::vector<double> p_second;
    std::vector<double> q2;
    std::vector<double> t_p;
    std::vector<bool> zero_displacement;
};

ModifiedStep modified_step(const SecantSimplex& simplex, std::span<const double> p_new,
                           std::span<const double> h_new, double rank_tol = kDefaultRankTol);

enum class SecantVariant { Wolfe, Modified };
enum class BoundsPolicy { Project, Reject };

struct SolverOptions {
    std::size_t max_iterations = 100;
    double merit_tolerance = 1e-12;
    double stagnation_tolerance = 1e-10;
    double rank_tol = kDefaultRankTol;
    SecantVariant variant = SecantVariant::Modified;
    BoundsPolicy bounds_policy = BoundsPolicy::Project;
    /// Accept-always is the default; the paper's method has no line search
    /// and relies on large steps. Reject-worse keeps candidates that would
    /// displace a better base out of the simplex.
    bool reject_worse = false;
    std::uint64_t repair_seed = 0x5eca47u;
    /// Called with the free-space point before every residual evaluation.
    std::function<void(std::span<const double>)> evaluation_hook;

    void validate() const;
};

enum class SolveStatus { Converged, Stagnated, IterationLimit, Degenerate };

std::string to_string(SolveStatus s);

struct IterateResult {
    ParameterVector solution;
    double merit = 0.0;
    std::vector<StepReport> trace;
    SolveStatus status = SolveStatus::Converged;
    std::size_t residual_evaluations = 0;
};

/// Full-space secant iteration on the real-life residual h(p) = f - u(p).
IterateResult iterate(const ModelDefinition& model, const DataSeries& data,
                      const SecantSimplex& initial, const SolverOptions& opts);

/// Same protocol in the nonlinear subspace only: every residual evaluation is
/// preceded by the exact linear sub-minimization, and the returned solution
/// carries the eliminated linear part. An all-linear model (empty nonlinear
/// simplex) reduces to a single elimination.
IterateResult iterate_with_elimination(const ModelDefinition& model, const DataSeries& data,
                                       std::vector<std::vector<double>> initial_nonlinear_points,
                                       const SolverOptions& opts);

} // namespace splitfit

#endif
