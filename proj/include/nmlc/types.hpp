#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace nmlc {

using Point = std::vector<double>;
using Params = std::vector<double>;
using PointView = std::span<const double>;
using ParamView = std::span<const double>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct Interval {
    double lower = 0.0;
    double upper = 1.0;

    double width() const noexcept { return upper - lower; }
    bool finite() const noexcept;
    bool contains(double x) const noexcept { return x >= lower && x <= upper; }
};

/// Axis-aligned box; every axis must be finite before it is handed to a
/// quadrature routine.
struct Box {
    std::vector<Interval> axes;

    Box() = default;
    explicit Box(std::vector<Interval> a) : axes(std::move(a)) {}
    static Box cube(std::size_t dim, double lower, double upper);

    std::size_t dim() const noexcept { return axes.size(); }
    double volume() const noexcept;
    bool finite() const noexcept;
    bool contains(PointView x) const noexcept;
};

} // namespace nmlc
