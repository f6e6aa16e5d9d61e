#pragma once

#include "nmlc/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace nmlc {

enum class QuadMethod { grid, adaptive_1d, qmc };

std::string_view to_string(QuadMethod m) noexcept;
QuadMethod parse_quad_method(std::string_view name);

struct QuadratureSpec {
    QuadMethod method = QuadMethod::adaptive_1d;
    /// Grid points per axis (grid method; the finer pass uses twice this).
    std::size_t resolution = 256;
    /// Total node count across all QMC replicates.
    std::size_t budget = std::size_t{1} << 18;
    std::size_t replicates = 16;
    /// Uniform pieces the adaptive rule starts from; features narrower than
    /// a piece's node spacing can otherwise go unseen.
    std::size_t initial_segments = 8;
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    /// Mass omitted by truncating an unbounded domain; added to error_estimate.
    double tail_bound = 0.0;
    std::uint64_t seed = 1;
    /// Per-axis QMC grading exponents p >= 1 (x = lo + (hi - lo) u^p).
    /// Empty means uniform.
    std::vector<double> grading;

    void validate() const;
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t nodes_used = 0;
};

using Integrand = std::function<double(PointView)>;
using Integrand1d = std::function<double(double)>;

/// Compensated (Neumaier) accumulator.
class KahanSum {
public:
    KahanSum& operator+=(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Composite midpoint rule at `resolution` and `2 * resolution` points per
/// axis, combined by Richardson extrapolation (fourth order for smooth f).
/// error_estimate is |fine - coarse| / 3, the error of the finer pass.
/// Endpoints are never evaluated.
IntegralResult grid_integrate(const Integrand& f, const Box& box, const QuadratureSpec& spec);

/// Globally adaptive Gauss-Kronrod (7/15) bisection starting from
/// `initial_segments` equal pieces. Stops when the summed error estimate
/// drops below max(abs_tol, rel_tol |I|) and no join between neighbouring
/// pieces hides a jump; throws max_depth when a piece would need more than
/// 60 bisections. Known jump locations in `breaks` become segment ends.
IntegralResult adaptive_integrate_1d(const Integrand1d& f, Interval interval, double abs_tol,
                                     double rel_tol = 0.0, std::size_t initial_segments = 1,
                                     std::span<const double> breaks = {});

/// Known jump locations along `axis` given the coordinates of x before it.
using AxisBreaks = std::function<std::vector<double>(PointView x, std::size_t axis)>;

/// Nested adaptive_integrate_1d, one axis at a time (D <= 3). Handles
/// integrands with oblique jump discontinuities that tensor grids resolve
/// only at first order.
IntegralResult iterated_integrate(const Integrand& f, const Box& box, double abs_tol,
                                  double rel_tol = 0.0, std::size_t initial_segments = 8,
                                  const AxisBreaks& breaks = {});

/// Randomly shifted Kronecker (R_d) lattice averaged over `spec.replicates`
/// shifts. error_estimate is the standard error across replicates plus the
/// tail bound.
IntegralResult qmc_integrate(const Integrand& f, const Box& box, const QuadratureSpec& spec);

/// Dispatches on spec.method. adaptive_1d on a multi-dimensional box means
/// iterated_integrate.
IntegralResult integrate(const Integrand& f, const Box& box, const QuadratureSpec& spec);

/// Worker count for node evaluation: NMLC_THREADS if set, otherwise the
/// hardware concurrency.
unsigned thread_count();

} // namespace nmlc
