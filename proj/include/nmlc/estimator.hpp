#pragma once

#include "nmlc/jacobian.hpp"
#include "nmlc/types.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace nmlc {

/// A parametrization of one fiber {x : f(x) = level} of an estimator map.
///
/// For codimension m = D - K >= 1 the fiber is the image of `domain` (a box in
/// R^m) under `parametrization`, whose Jacobian provides the surface element.
/// For m = 0 the fiber is the finite set `points` and the Hausdorff measure
/// is counting measure.
struct LevelSetChart {
    std::size_t codim = 0;
    Params level;
    Box domain;
    JacobianProvider parametrization;
    std::vector<Point> points;
    /// The estimator whose fiber this is; used for the consistency check.
    VectorMap estimator;
};

using ChartFactory = std::function<LevelSetChart(ParamView level)>;

/// An estimator f: R^D -> R^K together with its derivative and, when
/// available, charts of its fibers.
struct EstimatorMap {
    JacobianProvider jacobian;
    ChartFactory chart;

    std::size_t data_dim() const noexcept { return jacobian.in_dim(); }
    std::size_t param_dim() const noexcept { return jacobian.out_dim(); }
    Params operator()(PointView x) const { return jacobian.map()(x); }
    bool has_chart() const noexcept { return static_cast<bool>(chart); }
};

} // namespace nmlc
