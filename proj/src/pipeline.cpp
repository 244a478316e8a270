#include "splitfit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>

#include <json.hpp>

#include "splitfit/config.hpp"
#include "splitfit/csv.hpp"
#include "splitfit/follower.hpp"
#include "splitfit/grid.hpp"
#include "splitfit/secant.hpp"

namespace splitfit::cli {

using nlohmann::json;

namespace {

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return j;
}

RunConfig load(const CommonArgs& args) {
    RunConfig cfg = load_config(args.config);
    if (args.seed) cfg.noise.seed = *args.seed;
    if (args.workers) cfg.workers = *args.workers;
    return cfg;
}

DataSeries load_data(const CommonArgs& args) {
    if (args.data.empty()) throw DataError("this command needs --data");
    return read_series(args.data);
}

json interval_list(const std::vector<Interval>& intervals) {
    json out = json::array();
    for (const auto& iv : intervals) out.push_back({iv.lo, iv.hi});
    return out;
}

/// Follower sections over every grid axis plus the configured linear-section
/// axes (on the re-pinned model). Returns (parameter name, section).
std::vector<std::pair<std::string, CleverSection>>
follower_sections(const RunConfig& cfg, const DataSeries& simulated, double rank_tol) {
    std::vector<std::pair<std::string, CleverSection>> out;
    if (!cfg.grid.axes.empty()) {
        const GridScan fscan = scan(cfg.model, simulated, cfg.grid, rank_tol, cfg.workers);
        for (std::size_t a = 0; a < cfg.grid.axes.size(); ++a)
            out.emplace_back(cfg.model.parameter_names[cfg.grid.axes[a].parameter_index],
                             clever_section(fscan, a));
    }
    for (const auto& spec : cfg.linear_sections) {
        const ModelDefinition pinned = repin_linear(cfg.model, spec.parameter_index);
        GridSpec g = cfg.grid;
        g.axes.push_back({spec.parameter_index, spec.lo, spec.hi, spec.count, spec.spacing});
        const GridScan fscan = scan(pinned, simulated, g, rank_tol, cfg.workers);
        out.emplace_back(cfg.model.parameter_names[spec.parameter_index],
                         clever_section(fscan, g.axes.size() - 1));
    }
    return out;
}

json error_interval_json(const RunConfig& cfg, const std::string& name,
                         const CleverSection& section, const ErrorInterval& domain,
                         const ParameterVector& p_min) {
    json j;
    j["parameter"] = name;
    j["level"] = domain.level;
    j["intervals"] = interval_list(domain.intervals);
    j["half_width"] = domain.half_width;
    if (domain.minimizer_interval) {
        j["minimizer_interval"] = *domain.minimizer_interval;
        j["width"] = domain.intervals[*domain.minimizer_interval].width();
    }
    bool jumps = false;
    for (const auto& s : section.samples) jumps = jumps || s.jump_from_previous;
    j["basin_jumps"] = jumps;
    if (!cfg.truth.empty()) {
        const auto it = cfg.truth.find(name);
        if (it != cfg.truth.end() && domain.minimizer_interval) {
            const double true_error =
                std::abs(p_min[cfg.parameter_index(name)] - it->second);
            j["true_error"] = true_error;
            const double width = domain.intervals[*domain.minimizer_interval].width();
            if (width > 0.0) j["true_error_over_width"] = true_error / width;
        }
    }
    return j;
}

ParameterVector solution_from_report(const RunConfig& cfg, const json& report) {
    const std::vector<double> values = report.at("solution").get<std::vector<double>>();
    return cfg.model.make_point(values);
}

int guarded(const char* command, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << command << ": configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << command << ": data error: " << e.what() << '\n';
        return kExitData;
    } catch (const EvaluationError& e) {
        std::cerr << command << ": data error: " << e.what() << '\n';
        return kExitData;
    } catch (const DegenerateSimplexError& e) {
        std::cerr << command << ": solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const Error& e) {
        std::cerr << command << ": configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
}

} // namespace

int run_simulate(const CommonArgs& args) {
    return guarded("simulate", [&]() {
        const RunConfig cfg = load(args);
        if (!cfg.schedule) throw ConfigError("simulate needs a schedule");
        const ParameterVector truth = cfg.model.make_point(cfg.truth_vector());

        std::vector<double> values = response(cfg.model, truth, *cfg.schedule);
        const std::vector<double> z = cfg.noise.generate(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += z[i];

        std::filesystem::create_directories(args.out_dir);
        write_series(args.out_dir / "data.csv", DataSeries(*cfg.schedule, values));

        json truth_doc;
        truth_doc["model"] = cfg.model_id;
        for (std::size_t i = 0; i < cfg.model.parameter_count; ++i)
            truth_doc["parameters"][cfg.model.parameter_names[i]] = truth[i];
        truth_doc["noise"]["seed"] = cfg.noise.seed;
        truth_doc["noise"]["amplitude"] = cfg.noise.amplitude;
        write_json(args.out_dir / "truth.json", truth_doc);
        return kExitOk;
    });
}

namespace {

json base_report(const RunConfig& cfg, const std::string& engine, const ParameterVector& sol,
                 double merit_value, std::size_t evaluations) {
    json report;
    report["model"] = cfg.model_id;
    report["engine"] = engine;
    report["parameter_names"] = cfg.model.parameter_names;
    report["solution"] = sol.values();
    report["merit"] = merit_value;
    report["noise_norm_sq"] = merit_value;
    report["evaluations"] = evaluations;
    report["status"] = "ok";
    report["error_intervals"] = json::array();
    return report;
}

void write_scan_csv(const std::filesystem::path& path, const RunConfig& cfg,
                    const GridScan& sc) {
    CsvTable t;
    for (const auto& axis : sc.grid.axes)
        t.header.push_back(cfg.model.parameter_names[axis.parameter_index]);
    for (std::size_t j : sc.split.linear_indices())
        t.header.push_back(cfg.model.parameter_names[j]);
    t.header.push_back("merit");
    t.header.push_back("effective_rank");
    t.header.push_back("failed");
    for (const auto& node : sc.nodes) {
        std::vector<double> row = node.coords;
        if (node.failed)
            row.insert(row.end(), sc.split.linear_indices().size(), 0.0);
        else
            row.insert(row.end(), node.linear_part.begin(), node.linear_part.end());
        row.push_back(node.section_value);
        row.push_back(static_cast<double>(node.effective_rank));
        row.push_back(node.failed ? 1.0 : 0.0);
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<StepReport>& trace) {
    CsvTable t;
    t.header = {"iteration", "merit_base", "merit_new", "q_norm", "step_norm", "action_code"};
    for (const auto& r : trace) {
        double qn = 0.0;
        for (double v : r.q) qn += v * v;
        // action encoded: 0 wolfe, 1 modified, 2 repair, 3 rejected/failed
        double code = 3.0;
        if (r.action.rfind("wolfe", 0) == 0) code = 0.0;
        if (r.action.rfind("modified", 0) == 0) code = 1.0;
        if (r.action == "repair") code = 2.0;
        if (r.action.find("reject") != std::string::npos ||
            r.action.find("failed") != std::string::npos)
            code = 3.0;
        t.rows.push_back({static_cast<double>(r.iteration), r.merit_base, r.merit_new,
                          std::sqrt(qn), r.step_norm, code});
    }
    write_csv(path, t);
}

} // namespace

int run_fit(const CommonArgs& args) {
    return guarded("fit", [&]() {
        const RunConfig cfg = load(args);
        const DataSeries data = load_data(args);
        std::filesystem::create_directories(args.out_dir);

        json report;
        int exit_code = kExitOk;

        if (args.engine == "grid") {
            const GridScan sc = scan(cfg.model, data, cfg.grid, cfg.solver.rank_tol, cfg.workers);
            auto [p_min, f_min] = global_min(sc);
            report = base_report(cfg, args.engine, p_min, f_min, sc.evaluations);
            write_scan_csv(args.out_dir / "scan.csv", cfg, sc);

            if (cfg.model.split.nonlinear_indices().empty()) {
                const DenseMatrix a = design_matrix(cfg.model, {}, data.schedule);
                const DenseMatrix g = gram(a);
                json gj = json::array();
                for (std::size_t i = 0; i < g.rows(); ++i) {
                    json row = json::array();
                    for (std::size_t k = 0; k < g.cols(); ++k) row.push_back(g(i, k));
                    gj.push_back(row);
                }
                json atf = json::array();
                for (std::size_t k = 0; k < a.cols(); ++k) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, k) * data.values[i];
                    atf.push_back(s);
                }
                report["normal_equations"]["gram"] = gj;
                report["normal_equations"]["atf"] = atf;
            }

            // Error intervals from the follower sections at level F(p_min).
            const FollowerModel fm = make_follower(cfg.model, p_min, data.schedule);
            const double level = cfg.analysis_level.value_or(f_min);
            for (const auto& [name, section] :
                 follower_sections(cfg, fm.simulated, cfg.solver.rank_tol)) {
                const ErrorInterval domain = error_domain_1d(section, level);
                report["error_intervals"].push_back(
                    error_interval_json(cfg, name, section, domain, p_min));
            }
        } else if (args.engine == "secant" || args.engine == "secant-eliminated") {
            IterateResult result = [&]() {
                if (args.engine == "secant") {
                    const SecantSimplex initial = SecantSimplex::make(
                        cfg.start.resolve(cfg.model.parameter_count),
                        [&](std::span<const double> p) {
                            const ParameterVector pv = cfg.model.make_point({p.begin(), p.end()});
                            return residual(cfg.model, pv, data).entries;
                        });
                    return iterate(cfg.model, data, initial, cfg.solver);
                }
                const std::size_t n = cfg.model.split.nonlinear_indices().size();
                std::vector<std::vector<double>> start;
                if (n > 0) start = cfg.start.resolve(n);
                return iterate_with_elimination(cfg.model, data, start, cfg.solver);
            }();

            report = base_report(cfg, args.engine, result.solution, result.merit,
                                 result.residual_evaluations);
            report["status"] = to_string(result.status);
            if (result.status == SolveStatus::Degenerate) {
                report["status"] = "solver-failure:" + to_string(result.status);
                exit_code = kExitSolver;
            }
            write_trace_csv(args.out_dir / "trace.csv", result.trace);
        } else {
            throw ConfigError("unknown engine '" + args.engine +
                              "' (use grid, secant or secant-eliminated)");
        }

        write_json(args.out_dir / "fit_report.json", report);
        return exit_code;
    });
}

int run_sections(const CommonArgs& args) {
    return guarded("sections", [&]() {
        const RunConfig cfg = load(args);
        const DataSeries data = load_data(args);
        const json report = read_json(args.out_dir / "fit_report.json");
        const ParameterVector p_min = solution_from_report(cfg, report);
        const FollowerModel fm = make_follower(cfg.model, p_min, data.schedule);

        struct Pair {
            std::string name;
            CleverSection real;
            CleverSection follower;
        };
        std::vector<Pair> pairs;

        if (!cfg.grid.axes.empty()) {
            const GridScan rscan = scan(cfg.model, data, cfg.grid, cfg.solver.rank_tol, cfg.workers);
            const GridScan fscan =
                scan(cfg.model, fm.simulated, cfg.grid, cfg.solver.rank_tol, cfg.workers);
            for (std::size_t a = 0; a < cfg.grid.axes.size(); ++a)
                pairs.push_back({cfg.model.parameter_names[cfg.grid.axes[a].parameter_index],
                                 clever_section(rscan, a), clever_section(fscan, a)});
        }
        for (const auto& spec : cfg.linear_sections) {
            const ModelDefinition pinned = repin_linear(cfg.model, spec.parameter_index);
            GridSpec g = cfg.grid;
            g.axes.push_back({spec.parameter_index, spec.lo, spec.hi, spec.count, spec.spacing});
            const GridScan rscan = scan(pinned, data, g, cfg.solver.rank_tol, cfg.workers);
            const GridScan fscan = scan(pinned, fm.simulated, g, cfg.solver.rank_tol, cfg.workers);
            pairs.push_back({cfg.model.parameter_names[spec.parameter_index],
                             clever_section(rscan, g.axes.size() - 1),
                             clever_section(fscan, g.axes.size() - 1)});
        }

        if (pairs.empty()) throw ConfigError("no sections configured (grid or linear_axes)");

        std::filesystem::create_directories(args.out_dir);
        for (const auto& p : pairs) {
            CsvTable t;
            t.header = {"value", "real_merit", "follower_merit", "basin_jump"};
            for (std::size_t i = 0; i < p.real.samples.size(); ++i) {
                const auto& rs = p.real.samples[i];
                t.rows.push_back({rs.x, rs.value, p.follower.samples[i].value,
                                  rs.jump_from_previous ? 1.0 : 0.0});
            }
            write_csv(args.out_dir / ("section_" + p.name + ".csv"), t);
        }
        return kExitOk;
    });
}

int run_analyze(const CommonArgs& args) {
    return guarded("analyze", [&]() {
        const RunConfig cfg = load(args);
        const DataSeries data = load_data(args);
        const json report = read_json(args.out_dir / "fit_report.json");
        const ParameterVector p_min = solution_from_report(cfg, report);

        const FollowerModel fm = make_follower(cfg.model, p_min, data.schedule);
        const NoiseVector z = noise_decompose(fm, data);
        const double f_min = merit(cfg.model, p_min, data);

        json out;
        out["parameter_names"] = cfg.model.parameter_names;
        out["p_min"] = p_min.values();
        out["merit_min"] = f_min;
        out["noise_norm_sq"] = z.norm_sq;
        out["noise"] = z.entries;

        // Probe points: configured, else nudges of p_min along each axis.
        std::vector<std::vector<double>> probes = cfg.probes;
        if (probes.empty()) {
            for (std::size_t i = 0; i < cfg.model.parameter_count; ++i) {
                for (const double dir : {-1.0, 1.0}) {
                    std::vector<double> p = p_min.values();
                    const Interval& b = cfg.model.domain[i];
                    const double nudge = 0.05 * (b.hi - b.lo);
                    p[i] = std::clamp(p[i] + dir * nudge, b.lo, b.hi);
                    probes.push_back(std::move(p));
                }
            }
        }

        out["identity_checks"] = json::array();
        out["band_checks"] = json::array();
        double worst_identity = 0.0;
        for (const auto& probe : probes) {
            const ParameterVector p = cfg.model.make_point(probe);
            const MeritRelation rel = merit_relation_check(fm, data, p);
            const double resid = std::abs(rel.lhs - rel.rhs);
            worst_identity = std::max(worst_identity, resid / (1.0 + std::abs(rel.lhs)));
            out["identity_checks"].push_back(
                {{"probe", probe}, {"lhs", rel.lhs}, {"rhs", rel.rhs}, {"residual", resid}});

            const SimilarityBand band = similarity_band(fm, z, p);
            const double diff = merit(cfg.model, p, data) - follower_merit(fm, p);
            out["band_checks"].push_back({{"probe", probe},
                                          {"lower", band.lower},
                                          {"upper", band.upper},
                                          {"difference", diff},
                                          {"inside", band.lower <= diff && diff <= band.upper},
                                          {"in_similarity_domain",
                                           in_similarity_domain(fm, z, p)}});
        }
        out["max_identity_residual"] = worst_identity;

        const double level = cfg.analysis_level.value_or(f_min);
        out["level"] = level;
        out["error_intervals"] = json::array();
        for (const auto& [name, section] :
             follower_sections(cfg, fm.simulated, cfg.solver.rank_tol)) {
            const ErrorInterval domain = error_domain_1d(section, level);
            out["error_intervals"].push_back(
                error_interval_json(cfg, name, section, domain, p_min));
        }

        std::filesystem::create_directories(args.out_dir);
        write_json(args.out_dir / "analysis.json", out);
        return kExitOk;
    });
}

int run_compression_curve(const CommonArgs& args) {
    return guarded("compression-curve", [&]() {
        const RunConfig cfg = load(args);
        if (cfg.stage_files.empty())
            throw ConfigError("compression-curve needs a compression.stages list");
        if (cfg.grid.axes.size() != 1)
            throw ConfigError("compression-curve expects a one-axis grid over c");
        const std::size_t c_index = cfg.grid.axes[0].parameter_index;
        const std::size_t sigma_index = cfg.parameter_index("sigma_inf");

        // Long stage: full fit.
        const DataSeries long_data = read_series(cfg.stage_files[cfg.long_stage]);
        const GridScan long_scan =
            scan(cfg.model, long_data, cfg.grid, cfg.solver.rank_tol, cfg.workers);
        auto [long_min, long_f] = global_min(long_scan);
        const double c_long = long_min[c_index];

        std::filesystem::create_directories(args.out_dir);
        {
            json lj = base_report(cfg, "grid", long_min, long_f, long_scan.evaluations);
            lj["long_stage"] = cfg.long_stage;
            write_json(args.out_dir / "long_stage_fit.json", lj);
        }

        CsvTable t;
        t.header = {"stage", "sigma_inf", "c", "gap", "section_min"};
        for (std::size_t s = 0; s < cfg.stage_files.size(); ++s) {
            const DataSeries stage_data = read_series(cfg.stage_files[s]);
            const GridScan stage_scan =
                scan(cfg.model, stage_data, cfg.grid, cfg.solver.rank_tol, cfg.workers);
            const CleverSection section = clever_section(stage_scan, 0);
            const ResolvedPoint resolved = resolve_degenerate(section, c_long);
            double section_min = section.samples[0].value;
            for (const auto& sample : section.samples)
                section_min = std::min(section_min, sample.value);
            t.rows.push_back({static_cast<double>(s), resolved.params[sigma_index], c_long,
                              resolved.gap, section_min});
        }
        write_csv(args.out_dir / "compression_curve.csv", t);
        return kExitOk;
    });
}

} // namespace splitfit::cli
