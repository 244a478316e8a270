#ifndef SPLITFIT_GRID_HPP
#define SPLITFIT_GRID_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitfit/model.hpp"

namespace splitfit {

enum class AxisSpacing { Linear, Log };

/// One grid axis over a nonlinear model parameter.
struct GridAxis {
    std::size_t parameter_index = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 1;
    AxisSpacing spacing = AxisSpacing::Linear;

    std::vector<double> values() const;
};

/// Coordinate grid over the nonlinear subspace. An empty axis list describes
/// the single empty node of an all-linear model.
struct GridSpec {
    std::vector<GridAxis> axes;
    std::size_t node_count() const;
    void validate(const ModelDefinition& model) const;
};

struct GridNode {
    std::vector<double> coords;      ///< one value per axis
    std::vector<double> linear_part; ///< eliminated p1 at this node
    double section_value = 0.0;      ///< +inf for failed nodes
    std::size_t effective_rank = 0;
    bool failed = false;
};

/// Full scan result. Nodes are stored in lexicographic order with the last
/// axis fastest; results are deterministic for any worker count.
struct GridScan {
    GridSpec grid;
    std::vector<GridNode> nodes;
    std::size_t global_min_node = 0;
    std::size_t evaluations = 0;

    // Copied from the model so minimizers can be assembled later.
    ParameterSplit split = ParameterSplit::all_nonlinear(1);
    Bounds domain;
    std::vector<std::string> parameter_names;

    /// Axis position within the packed nonlinear order of the split.
    std::vector<std::size_t> axis_pack_positions;
};

/// Evaluates eliminate_linear at every grid node. Per-node failures are
/// recorded (infinity sentinel) and do not abort the scan.
GridScan scan(const ModelDefinition& model, const DataSeries& data, const GridSpec& grid,
              double rank_tol = kDefaultRankTol, unsigned workers = 1);

struct SectionSample {
    double x = 0.0;
    double value = 0.0;
    std::vector<double> complement_coords; ///< other axes of the argmin node
    std::vector<double> linear_part;       ///< eliminated p1 at the argmin node
    std::size_t node_index = 0;
    /// Argmin complement jumped by two or more grid steps since the previous
    /// sample (basin switch).
    bool jump_from_previous = false;
};

/// One-dimensional deepest section along one grid axis: for each axis value,
/// the minimal scanned value over all other coordinates together with the
/// minimizing complement (the sampled implicit function).
struct CleverSection {
    std::size_t axis = 0;
    std::size_t parameter_index = 0;
    std::vector<SectionSample> samples;

    ParameterSplit split = ParameterSplit::all_nonlinear(1);
    Bounds domain;
    std::vector<std::size_t> axis_pack_positions; ///< this axis last removed
    std::size_t own_pack_position = 0;
};

CleverSection clever_section(const GridScan& scan, std::size_t axis);

/// Minimizer of the scan, assembled into a full parameter vector.
std::pair<ParameterVector, double> global_min(const GridScan& scan);

struct ResolvedPoint {
    ParameterVector params;
    double gap = 0.0; ///< |x_known - nearest sampled x|
    std::size_t sample_index = 0;
};

/// Reads the full parameter vector off a section at the sample nearest to a
/// known coordinate value (nearest-sample lookup, no interpolation).
ResolvedPoint resolve_degenerate(const CleverSection& section, double x_known);

/// True iff projecting the scan directly onto the inner axes equals first
/// projecting onto the outer axes and then onto the inner ones, node by node.
bool nesting_check(const GridScan& scan, std::span<const std::size_t> inner_axes,
                   std::span<const std::size_t> outer_axes);

} // namespace splitfit

#endif
