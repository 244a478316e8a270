#include "splitfit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace splitfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> unravel(std::size_t index, const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t a = dims.size(); a-- > 0;) {
        idx[a] = index % dims[a];
        index /= dims[a];
    }
    return idx;
}

} // namespace

std::vector<double> GridAxis::values() const {
    if (count < 1) throw InvalidArgument("grid axis needs at least one point");
    if (!(lo <= hi)) throw InvalidArgument("grid axis range has lo > hi");
    if (spacing == AxisSpacing::Log && !(lo > 0.0))
        throw InvalidArgument("logarithmic axis needs a positive range");
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    if (spacing == AxisSpacing::Linear) {
        const double step = (hi - lo) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) v[i] = lo + static_cast<double>(i) * step;
        v[count - 1] = hi;
    } else {
        const double llo = std::log(lo);
        const double step = (std::log(hi) - llo) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) v[i] = std::exp(llo + static_cast<double>(i) * step);
        v[count - 1] = hi;
    }
    return v;
}

std::size_t GridSpec::node_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) {
        if (a.count < 1) throw InvalidArgument("grid axis needs at least one point");
        n *= a.count;
    }
    return n;
}

void GridSpec::validate(const ModelDefinition& model) const {
    const auto& nl = model.split.nonlinear_indices();
    std::vector<char> covered(model.parameter_count, 0);
    for (const auto& a : axes) {
        if (std::find(nl.begin(), nl.end(), a.parameter_index) == nl.end())
            throw InvalidArgument("grid axis parameter " + std::to_string(a.parameter_index) +
                                  " is not a nonlinear parameter of the model");
        if (covered[a.parameter_index])
            throw InvalidArgument("grid has two axes over the same parameter");
        covered[a.parameter_index] = 1;
        const Interval& bound = model.domain[a.parameter_index];
        if (a.lo < bound.lo || a.hi > bound.hi)
            throw InvalidArgument("grid axis range exceeds the parameter bounds");
        (void)a.values();
    }
    for (std::size_t i : nl)
        if (!covered[i])
            throw InvalidArgument("grid does not cover nonlinear parameter " + std::to_string(i));
    if (axes.size() != nl.size())
        throw InvalidArgument("grid axis count does not match the nonlinear parameter count");
}

GridScan scan(const ModelDefinition& model, const DataSeries& data, const GridSpec& grid,
              double rank_tol, unsigned workers) {
    model.validate();
    if (!model.has_basis())
        throw InvalidArgument("grid scan needs a partly-linear model (basis covering the "
                              "linear parameters)");
    grid.validate(model);

    GridScan out;
    out.grid = grid;
    out.split = model.split;
    out.domain = model.domain;
    out.parameter_names = model.parameter_names;

    // Axis order -> position in the packed nonlinear sub-vector.
    const auto& nl = model.split.nonlinear_indices();
    out.axis_pack_positions.resize(grid.axes.size());
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        const auto it = std::find(nl.begin(), nl.end(), grid.axes[a].parameter_index);
        out.axis_pack_positions[a] = static_cast<std::size_t>(it - nl.begin());
    }

    std::vector<std::vector<double>> axis_values(grid.axes.size());
    std::vector<std::size_t> dims(grid.axes.size());
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        axis_values[a] = grid.axes[a].values();
        dims[a] = grid.axes[a].count;
    }

    const std::size_t n = grid.node_count();
    out.nodes.resize(n);
    out.evaluations = n;

    auto eval_node = [&](std::size_t index) {
        GridNode& node = out.nodes[index];
        const std::vector<std::size_t> idx = unravel(index, dims);
        node.coords.resize(grid.axes.size());
        std::vector<double> p2(nl.size());
        for (std::size_t a = 0; a < grid.axes.size(); ++a) {
            node.coords[a] = axis_values[a][idx[a]];
            p2[out.axis_pack_positions[a]] = node.coords[a];
        }
        try {
            Elimination e = eliminate_linear(model, p2, data, rank_tol);
            node.linear_part = std::move(e.linear_part);
            node.section_value = e.section_value;
            node.effective_rank = e.effective_rank;
        } catch (const Error&) {
            node.failed = true;
            node.section_value = kInf;
        }
    };

    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) eval_node(i);
    } else {
        const unsigned count = std::min<unsigned>(workers, std::thread::hardware_concurrency() * 4 + 4);
        std::vector<std::thread> pool;
        pool.reserve(count);
        for (unsigned w = 0; w < count; ++w) {
            pool.emplace_back([&, w]() {
                for (std::size_t i = w; i < n; i += count) eval_node(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Deterministic reduction: lowest index wins ties.
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.nodes[i].failed) continue;
        if (best == n || out.nodes[i].section_value < out.nodes[best].section_value) best = i;
    }
    if (best == n) throw InvalidArgument("all grid nodes failed");
    out.global_min_node = best;
    return out;
}

CleverSection clever_section(const GridScan& scan, std::size_t axis) {
    if (axis >= scan.grid.axes.size()) throw InvalidArgument("section axis out of range");

    CleverSection sec;
    sec.axis = axis;
    sec.parameter_index = scan.grid.axes[axis].parameter_index;
    sec.split = scan.split;
    sec.domain = scan.domain;
    sec.own_pack_position = scan.axis_pack_positions[axis];
    for (std::size_t a = 0; a < scan.grid.axes.size(); ++a)
        if (a != axis) sec.axis_pack_positions.push_back(scan.axis_pack_positions[a]);

    std::vector<std::size_t> dims(scan.grid.axes.size());
    for (std::size_t a = 0; a < dims.size(); ++a) dims[a] = scan.grid.axes[a].count;
    const std::vector<double> xs = scan.grid.axes[axis].values();

    const std::size_t g = dims[axis];
    std::vector<std::size_t> argmin(g, scan.nodes.size());
    for (std::size_t i = 0; i < scan.nodes.size(); ++i) {
        if (scan.nodes[i].failed) continue;
        const std::size_t slot = unravel(i, dims)[axis];
        if (argmin[slot] == scan.nodes.size() ||
            scan.nodes[i].section_value < scan.nodes[argmin[slot]].section_value)
            argmin[slot] = i;
    }

    std::vector<std::vector<std::size_t>> prev_idx;
    for (std::size_t slot = 0; slot < g; ++slot) {
        if (argmin[slot] == scan.nodes.size())
            throw InvalidArgument("every node failed at section coordinate index " +
                                  std::to_string(slot));
        const GridNode& node = scan.nodes[argmin[slot]];
        SectionSample s;
        s.x = xs[slot];
        s.value = node.section_value;
        s.node_index = argmin[slot];
        s.linear_part = node.linear_part;
        const std::vector<std::size_t> idx = unravel(argmin[slot], dims);
        for (std::size_t a = 0; a < dims.size(); ++a)
            if (a != axis) s.complement_coords.push_back(node.coords[a]);
        // Basin switch: any complement index moved by 2+ steps.
        std::vector<std::size_t> comp_idx;
        for (std::size_t a = 0; a < dims.size(); ++a)
            if (a != axis) comp_idx.push_back(idx[a]);
        if (!prev_idx.empty()) {
            const auto& prev = prev_idx.back();
            for (std::size_t a = 0; a < comp_idx.size(); ++a) {
                const std::size_t d = comp_idx[a] > prev[a] ? comp_idx[a] - prev[a]
                                                            : prev[a] - comp_idx[a];
                if (d >= 2) {
                    s.jump_from_previous = true;
                    break;
                }
            }
        }
        prev_idx.push_back(std::move(comp_idx));
        sec.samples.push_back(std::move(s));
    }
    return sec;
}

std::pair<ParameterVector, double> global_min(const GridScan& scan) {
    const GridNode& node = scan.nodes[scan.global_min_node];
    std::vector<double> p2(scan.split.nonlinear_indices().size());
    for (std::size_t a = 0; a < scan.grid.axes.size(); ++a)
        p2[scan.axis_pack_positions[a]] = node.coords[a];
    std::vector<double> full = scan.split.assemble(node.linear_part, p2);
    return {ParameterVector(std::move(full), scan.split, scan.domain), node.section_value};
}

ResolvedPoint resolve_degenerate(const CleverSection& section, double x_known) {
    if (section.samples.empty()) throw InvalidArgument("section has no samples");
    const double first = section.samples.front().x;
    const double last = section.samples.back().x;
    if (x_known < std::min(first, last) || x_known > std::max(first, last))
        throw InvalidArgument("known coordinate " + std::to_string(x_known) +
                              " outside the sampled section range");

    std::size_t best = 0;
    double best_gap = std::abs(x_known - section.samples[0].x);
    for (std::size_t i = 1; i < section.samples.size(); ++i) {
        const double gap = std::abs(x_known - section.samples[i].x);
        if (gap < best_gap) {
            best = i;
            best_gap = gap;
        }
    }
    const SectionSample& s = section.samples[best];

    std::vector<double> p2(section.split.nonlinear_indices().size());
    p2[section.own_pack_position] = s.x;
    for (std::size_t a = 0; a < section.axis_pack_positions.size(); ++a)
        p2[section.axis_pack_positions[a]] = s.complement_coords[a];
    std::vector<double> full = section.split.assemble(s.linear_part, p2);
    return {ParameterVector(std::move(full), section.split, section.domain), best_gap, best};
}

namespace {

/// Dense min-projection of the scan onto a subset of axes.
struct ProjectionTable {
    std::vector<std::size_t> axes;
    std::vector<std::size_t> dims;
    std::vector<double> values;
};

ProjectionTable project(const GridScan& scan, std::span<const std::size_t> axes) {
    ProjectionTable t;
    t.axes.assign(axes.begin(), axes.end());
    std::vector<std::size_t> full_dims(scan.grid.axes.size());
    for (std::size_t a = 0; a < full_dims.size(); ++a) full_dims[a] = scan.grid.axes[a].count;

    std::size_t size = 1;
    for (std::size_t a : t.axes) {
        t.dims.push_back(full_dims[a]);
        size *= full_dims[a];
    }
    t.values.assign(size, kInf);

    for (std::size_t i = 0; i < scan.nodes.size(); ++i) {
        const std::vector<std::size_t> idx = unravel(i, full_dims);
        std::size_t flat = 0;
        for (std::size_t a = 0; a < t.axes.size(); ++a) flat = flat * t.dims[a] + idx[t.axes[a]];
        t.values[flat] = std::min(t.values[flat], scan.nodes[i].section_value);
    }
    return t;
}

ProjectionTable project(const ProjectionTable& table, std::span<const std::size_t> axes) {
    ProjectionTable t;
    t.axes.assign(axes.begin(), axes.end());
    std::vector<std::size_t> pos;
    for (std::size_t a : axes) {
        const auto it = std::find(table.axes.begin(), table.axes.end(), a);
        if (it == table.axes.end()) throw InvalidArgument("inner axes are not nested in outer axes");
        pos.push_back(static_cast<std::size_t>(it - table.axes.begin()));
        t.dims.push_back(table.dims[static_cast<std::size_t>(it - table.axes.begin())]);
    }
    std::size_t size = 1;
    for (std::size_t d : t.dims) size *= d;
    t.values.assign(size, kInf);

    for (std::size_t i = 0; i < table.values.size(); ++i) {
        const std::vector<std::size_t> idx = unravel(i, table.dims);
        std::size_t flat = 0;
        for (std::size_t a = 0; a < pos.size(); ++a) flat = flat * t.dims[a] + idx[pos[a]];
        t.values[flat] = std::min(t.values[flat], table.values[i]);
    }
    return t;
}

} // namespace

bool nesting_check(const GridScan& scan, std::span<const std::size_t> inner_axes,
                   std::span<const std::size_t> outer_axes) {
    for (std::size_t a : inner_axes)
        if (std::find(outer_axes.begin(), outer_axes.end(), a) == outer_axes.end())
            throw InvalidArgument("inner axes are not nested in outer axes");
    for (std::size_t a : outer_axes)
        if (a >= scan.grid.axes.size()) throw InvalidArgument("axis index out of range");

    const ProjectionTable direct = project(scan, inner_axes);
    const ProjectionTable outer = project(scan, outer_axes);
    const ProjectionTable via_outer = project(outer, inner_axes);

    return direct.values == via_outer.values;
}

} // namespace splitfit
