#include "splitfit/secant.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace splitfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kStagnationWindow = 5;
constexpr int kMaxRepairs = 3;

double norm_sq(std::span<const double> v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return s;
}

} // namespace

SecantSimplex SecantSimplex::make(std::vector<std::vector<double>> points,
                                  const ResidualFn& residual_fn) {
    std::vector<std::vector<double>> residuals;
    residuals.reserve(points.size());
    for (const auto& p : points) residuals.push_back(residual_fn(p));
    return from_evaluated(std::move(points), std::move(residuals));
}

SecantSimplex SecantSimplex::from_evaluated(std::vector<std::vector<double>> points,
                                            std::vector<std::vector<double>> residuals) {
    if (points.empty()) throw InvalidArgument("simplex needs at least one trial point");
    const std::size_t n = points[0].size();
    if (points.size() != n + 1)
        throw DimensionError("simplex over " + std::to_string(n) + " parameters needs " +
                             std::to_string(n + 1) + " trial points, got " +
                             std::to_string(points.size()));
    if (residuals.size() != points.size())
        throw DimensionError("residual count does not match trial count");
    const std::size_t m = residuals[0].size();
    if (m < n) throw DimensionError("residual length must be at least the parameter count");
    for (const auto& p : points) {
        if (p.size() != n) throw DimensionError("trial points have mixed dimensions");
        for (double v : p)
            if (!std::isfinite(v)) throw InvalidArgument("trial point has non-finite entries");
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j])
                throw DegenerateSimplexError("trial points " + std::to_string(i) + " and " +
                                             std::to_string(j) + " coincide");
    SecantSimplex s;
    s.points_ = std::move(points);
    s.residuals_ = std::move(residuals);
    s.merits_.resize(s.points_.size());
    for (std::size_t i = 0; i < s.points_.size(); ++i) {
        if (s.residuals_[i].size() != m)
            throw DimensionError("residual vectors have mixed lengths");
        s.merits_[i] = norm_sq(s.residuals_[i]);
    }
    s.rotate_best_front();
    return s;
}

void SecantSimplex::rotate_best_front() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < merits_.size(); ++i)
        if (merits_[i] < merits_[best]) best = i;
    if (best != 0) {
        std::swap(points_[0], points_[best]);
        std::swap(residuals_[0], residuals_[best]);
        std::swap(merits_[0], merits_[best]);
    }
}

std::size_t SecantSimplex::worst_index() const {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < merits_.size(); ++i)
        if (merits_[i] > merits_[worst]) worst = i;
    return worst;
}

void SecantSimplex::replace(std::size_t index, std::vector<double> point,
                            std::vector<double> residual) {
    if (index >= points_.size()) throw InvalidArgument("trial index out of range");
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (i != index && points_[i] == point)
            throw DegenerateSimplexError("replacement trial coincides with trial " +
                                         std::to_string(i));
    merits_[index] = norm_sq(residual);
    points_[index] = std::move(point);
    residuals_[index] = std::move(residual);
    rotate_best_front();
}

std::vector<std::vector<double>> axis_points(std::span<const double> center, double radius) {
    if (!(radius != 0.0) || !std::isfinite(radius))
        throw InvalidArgument("simplex radius must be nonzero and finite");
    std::vector<std::vector<double>> pts;
    pts.emplace_back(center.begin(), center.end());
    for (std::size_t i = 0; i < center.size(); ++i) {
        std::vector<double> p(center.begin(), center.end());
        p[i] += radius;
        pts.push_back(std::move(p));
    }
    return pts;
}

namespace {

/// Difference matrices of Eq 33: column i holds base minus trial i+1.
void difference_matrices(const SecantSimplex& s, Eigen::MatrixXd& a_p, Eigen::MatrixXd& a_r) {
    const std::size_t n = s.dimension();
    const std::size_t m = s.residual_size();
    a_p.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a_r.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            a_p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                s.base_point()[i] - s.points()[j + 1][i];
        for (std::size_t i = 0; i < m; ++i)
            a_r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                s.base_residual()[i] - s.residuals()[j + 1][i];
    }
}

} // namespace

WolfeStep wolfe_step(const SecantSimplex& simplex, double rank_tol) {
    const std::size_t n = simplex.dimension();
    if (n == 0) throw InvalidArgument("secant step needs at least one parameter");

    Eigen::MatrixXd a_p, a_r;
    difference_matrices(simplex, a_p, a_r);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rank_tol);

    WolfeStep out;
    out.report.merit_base = simplex.base_merit();
    const auto& sv = svd.singularValues();
    out.report.singular_values.assign(sv.data(), sv.data() + sv.size());

    if (static_cast<std::size_t>(svd.rank()) < n)
        throw DegenerateSimplexError("residual-difference matrix has rank " +
                                     std::to_string(svd.rank()) + " < " + std::to_string(n));

    Eigen::VectorXd h0(static_cast<Eigen::Index>(simplex.residual_size()));
    for (std::size_t i = 0; i < simplex.residual_size(); ++i)
        h0(static_cast<Eigen::Index>(i)) = simplex.base_residual()[i];

    const Eigen::VectorXd q = svd.solve(-h0);
    const Eigen::VectorXd step = a_p * q;

    out.report.q.assign(q.data(), q.data() + q.size());
    out.report.step_norm = step.norm();
    out.p_new.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.p_new[i] = simplex.base_point()[i] + step(static_cast<Eigen::Index>(i));
    out.report.action = "wolfe";
    return out;
}

ModifiedStep modified_step(const SecantSimplex& simplex, std::span<const double> p_new,
                           std::span<const double> h_new, double rank_tol) {
    const std::size_t n = simplex.dimension();
    const std::size_t m = simplex.residual_size();
    if (p_new.size() != n) throw DimensionError("p_new dimension does not match the simplex");
    if (h_new.size() != m) throw DimensionError("h_new length does not match the simplex");

    ModifiedStep out;
    for (std::size_t i = 0; i < m; ++i)
        if (simplex.base_residual()[i] == 0.0) return out; // tr_defined stays false
    out.tr_defined = true;

    Eigen::MatrixXd a_p, a_r;
    difference_matrices(simplex, a_p, a_r);

    // Row scaling by t_r^i = h^i(p_new)/h^i(p_0).
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const double tr = h_new[i] / simplex.base_residual()[i];
        a_r.row(static_cast<Eigen::Index>(i)) *= tr;
        rhs(static_cast<Eigen::Index>(i)) = simplex.base_residual()[i];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rank_tol);
    const Eigen::VectorXd q2 = svd.solve(rhs);
    out.q2.assign(q2.data(), q2.data() + q2.size());

    const Eigen::VectorXd w = a_p * q2;
    out.p_second.resize(n);
    out.t_p.assign(n, 0.0);
    out.zero_displacement.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        const double d0 = simplex.base_point()[i] - p_new[i];
        if (wi == 0.0) {
            out.p_second[i] = p_new[i];
            out.zero_displacement[i] = true;
            continue;
        }
        const double tp = d0 / wi;
        const double candidate = p_new[i] - tp * d0;
        if (!std::isfinite(candidate)) {
            out.p_second[i] = p_new[i];
            out.zero_displacement[i] = true;
            continue;
        }
        out.t_p[i] = tp;
        out.p_second[i] = candidate;
    }
    return out;
}

void SolverOptions::validate() const {
    if (!(merit_tolerance > 0.0)) throw InvalidArgument("merit tolerance must be positive");
    if (!(stagnation_tolerance > 0.0))
        throw InvalidArgument("stagnation tolerance must be positive");
    if (!(rank_tol > 0.0 && rank_tol < 1.0))
        throw InvalidArgument("rank tolerance must lie in (0, 1)");
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::Stagnated: return "stagnated";
        case SolveStatus::IterationLimit: return "iteration-limit";
        case SolveStatus::Degenerate: return "degenerate-simplex";
    }
    return "?";
}

namespace {

/// Engine state shared by the full-space and eliminated drivers.
struct Engine {
    ResidualFn residual_fn;
    Bounds free_bounds;
    const SolverOptions& opts;
    std::size_t evaluations = 0;
    std::mt19937_64 rng;

    Engine(ResidualFn fn, Bounds bounds, const SolverOptions& o)
        : residual_fn(std::move(fn)), free_bounds(std::move(bounds)), opts(o),
          rng(o.repair_seed) {}

    std::vector<double> eval(std::span<const double> p) {
        if (opts.evaluation_hook) opts.evaluation_hook(p);
        ++evaluations;
        return residual_fn(p);
    }

    bool project(std::vector<double>& p) const {
        bool touched = false;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double clamped = std::clamp(p[i], free_bounds[i].lo, free_bounds[i].hi);
            if (clamped != p[i]) {
                p[i] = clamped;
                touched = true;
            }
        }
        return touched;
    }

    bool in_bounds(std::span<const double> p) const {
        for (std::size_t i = 0; i < p.size(); ++i)
            if (!free_bounds[i].contains(p[i])) return false;
        return true;
    }
};

struct BestPoint {
    std::vector<double> point;
    double merit = kInf;

    void offer(std::span<const double> p, double f) {
        if (f < merit) {
            merit = f;
            point.assign(p.begin(), p.end());
        }
    }
};

/// Direction in parameter space along which the simplex is most collapsed.
std::vector<double> collapsed_direction(const SecantSimplex& s) {
    Eigen::MatrixXd a_p, a_r;
    difference_matrices(s, a_p, a_r);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_p, Eigen::ComputeFullU);
    const Eigen::VectorXd u = svd.matrixU().col(static_cast<Eigen::Index>(s.dimension()) - 1);
    return {u.data(), u.data() + u.size()};
}

struct CoreResult {
    std::vector<double> point;
    double merit = kInf;
    std::vector<StepReport> trace;
    SolveStatus status = SolveStatus::IterationLimit;
    std::size_t evaluations = 0;
};

CoreResult run_core(Engine& engine, SecantSimplex simplex) {
    const SolverOptions& opts = engine.opts;
    CoreResult out;

    BestPoint best;
    for (std::size_t i = 0; i < simplex.points().size(); ++i)
        best.offer(simplex.points()[i], simplex.merits()[i]);

    if (best.merit <= opts.merit_tolerance) {
        out.status = SolveStatus::Converged;
    } else if (opts.max_iterations == 0) {
        out.status = SolveStatus::IterationLimit;
    } else {
        int stagnant = 0;
        int repairs = 0;
        double prev_best = best.merit;
        for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
            StepReport report;
            report.iteration = it;

            std::vector<double> p_new;
            try {
                WolfeStep step = wolfe_step(simplex, opts.rank_tol);
                report = std::move(step.report);
                report.iteration = it;
                p_new = std::move(step.p_new);
            } catch (const DegenerateSimplexError&) {
                if (++repairs > kMaxRepairs) {
                    out.status = SolveStatus::Degenerate;
                    break;
                }
                // Replace the worst trial along the most-collapsed direction.
                const std::vector<double> dir = collapsed_direction(simplex);
                std::uniform_real_distribution<double> mag(0.5, 1.5);
                const double sign = (engine.rng() & 1u) ? 1.0 : -1.0;
                const double scale = 10.0 * opts.merit_tolerance * mag(engine.rng) * sign;
                std::vector<double> p = simplex.base_point();
                for (std::size_t i = 0; i < p.size(); ++i) p[i] += scale * dir[i];
                engine.project(p);
                report.action = "repair";
                bool ok = true;
                try {
                    std::vector<double> h = engine.eval(p);
                    simplex.replace(simplex.worst_index(), std::move(p), std::move(h));
                } catch (const Error&) {
                    ok = false;
                }
                report.merit_base = simplex.base_merit();
                out.trace.push_back(std::move(report));
                if (!ok && repairs >= kMaxRepairs) {
                    out.status = SolveStatus::Degenerate;
                    break;
                }
                continue;
            }

            if (!engine.in_bounds(p_new)) {
                if (opts.bounds_policy == BoundsPolicy::Reject) {
                    report.action = "reject-bounds";
                    out.trace.push_back(std::move(report));
                    if (++stagnant >= kStagnationWindow) {
                        out.status = SolveStatus::Stagnated;
                        break;
                    }
                    continue;
                }
                engine.project(p_new);
                report.bound_projection = true;
            }

            std::vector<double> h_new;
            try {
                h_new = engine.eval(p_new);
            } catch (const Error&) {
                report.action = "eval-failed";
                out.trace.push_back(std::move(report));
                if (++stagnant >= kStagnationWindow) {
                    out.status = SolveStatus::Stagnated;
                    break;
                }
                continue;
            }
            report.merit_new = norm_sq(h_new);
            best.offer(p_new, report.merit_new);

            bool plain_update = true;
            if (opts.variant == SecantVariant::Modified &&
                report.merit_new > opts.merit_tolerance) {
                const ModifiedStep mod = modified_step(simplex, p_new, h_new, opts.rank_tol);
                if (!mod.tr_defined) {
                    report.tr_fallback = true;
                } else {
                    report.action = "modified";
                    report.q2 = mod.q2;
                    for (bool flag : mod.zero_displacement)
                        report.zero_displacement = report.zero_displacement || flag;

                    std::vector<double> p_second = mod.p_second;
                    const bool second_projected = engine.project(p_second);
                    report.bound_projection = report.bound_projection || second_projected;
                    try {
                        const std::vector<double> h_second = engine.eval(p_second);
                        report.merit_second = norm_sq(h_second);
                        best.offer(p_second, report.merit_second);
                    } catch (const Error&) {
                        // p_second only guides the rebuild; keep going.
                    }

                    // Next simplex: base p_new plus axis displacements toward
                    // p_second. Zero displacements get the repair magnitude.
                    std::vector<std::vector<double>> pts;
                    std::vector<std::vector<double>> res;
                    pts.push_back(p_new);
                    res.push_back(h_new);
                    bool built = true;
                    for (std::size_t i = 0; i < p_new.size(); ++i) {
                        double delta = p_second[i] - p_new[i];
                        if (delta == 0.0) {
                            delta = 10.0 * opts.merit_tolerance;
                            report.zero_displacement = true;
                        }
                        std::vector<double> p = p_new;
                        p[i] += delta;
                        engine.project(p);
                        try {
                            res.push_back(engine.eval(p));
                        } catch (const Error&) {
                            built = false;
                            break;
                        }
                        pts.push_back(std::move(p));
                    }
                    if (built) {
                        try {
                            SecantSimplex candidate =
                                SecantSimplex::from_evaluated(std::move(pts), std::move(res));
                            if (opts.reject_worse &&
                                candidate.base_merit() > simplex.base_merit()) {
                                report.action = "modified-rejected";
                            } else {
                                simplex = std::move(candidate);
                                plain_update = false;
                            }
                        } catch (const DegenerateSimplexError&) {
                            report.action = "modified-degenerate";
                        }
                    } else {
                        report.action = "modified-eval-failed";
                    }
                }
            }

            if (plain_update) {
                if (report.action.empty() || report.action == "wolfe") report.action = "wolfe";
                const std::size_t victim = simplex.worst_index();
                const bool new_is_worst = report.merit_new >= simplex.merits()[victim];
                if (opts.reject_worse && new_is_worst) {
                    report.action += "-rejected";
                } else {
                    try {
                        simplex.replace(victim, p_new, std::move(h_new));
                    } catch (const DegenerateSimplexError&) {
                        report.action += "-duplicate";
                    }
                }
            }

            out.trace.push_back(report);
            repairs = 0;

            if (best.merit <= opts.merit_tolerance) {
                out.status = SolveStatus::Converged;
                break;
            }
            if (prev_best - best.merit <= opts.stagnation_tolerance * (1.0 + best.merit)) {
                if (++stagnant >= kStagnationWindow) {
                    out.status = SolveStatus::Stagnated;
                    break;
                }
            } else {
                stagnant = 0;
            }
            prev_best = best.merit;
        }
    }

    out.point = best.point;
    out.merit = best.merit;
    out.evaluations = engine.evaluations;
    return out;
}

Bounds pack_bounds(const Bounds& domain, const std::vector<std::size_t>& indices) {
    Bounds out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) out[i] = domain[indices[i]];
    return out;
}

} // namespace

IterateResult iterate(const ModelDefinition& model, const DataSeries& data,
                      const SecantSimplex& initial, const SolverOptions& opts) {
    model.validate();
    opts.validate();
    if (initial.dimension() != model.parameter_count)
        throw DimensionError("simplex dimension does not match the parameter count");

    Engine engine(
        [&model, &data](std::span<const double> p) {
            const ParameterVector pv = model.make_point({p.begin(), p.end()});
            return residual(model, pv, data).entries;
        },
        model.domain, opts);
    // The initial simplex arrives evaluated; count its trials anyway.
    engine.evaluations = initial.points().size();

    CoreResult core = run_core(engine, initial);

    IterateResult out{model.make_point(core.point), core.merit, std::move(core.trace),
                      core.status, core.evaluations};
    return out;
}

IterateResult iterate_with_elimination(const ModelDefinition& model, const DataSeries& data,
                                       std::vector<std::vector<double>> initial_nonlinear_points,
                                       const SolverOptions& opts) {
    model.validate();
    opts.validate();
    if (!model.has_basis())
        throw InvalidArgument("elimination needs a partly-linear model");
    const std::size_t n = model.split.nonlinear_indices().size();

    if (n == 0) {
        // All-linear model: the conditional minimization is the answer.
        const Elimination e = eliminate_linear(model, {}, data, opts.rank_tol);
        std::vector<double> full = model.split.assemble(e.linear_part, {});
        return {model.make_point(std::move(full)), e.section_value, {},
                SolveStatus::Converged, 1};
    }

    for (const auto& p : initial_nonlinear_points)
        if (p.size() != n)
            throw DimensionError("initial simplex points must live in the nonlinear subspace");

    Engine engine(
        [&model, &data, &opts](std::span<const double> p2) {
            return eliminate_linear(model, p2, data, opts.rank_tol).residual;
        },
        pack_bounds(model.domain, model.split.nonlinear_indices()), opts);

    SecantSimplex initial = SecantSimplex::make(std::move(initial_nonlinear_points),
                                                [&engine](std::span<const double> p) {
                                                    return engine.eval(p);
                                                });

    CoreResult core = run_core(engine, std::move(initial));

    const Elimination e = eliminate_linear(model, core.point, data, opts.rank_tol);
    std::vector<double> full = model.split.assemble(e.linear_part, core.point);
    return {model.make_point(std::move(full)), e.section_value, std::move(core.trace),
            core.status, core.evaluations};
}

} // namespace splitfit
