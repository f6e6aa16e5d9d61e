#pragma once

#include "nmlc/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace nmlc {

using Matrix = Eigen::MatrixXd;
using VectorMap = std::function<Params(PointView)>;
using MatrixMap = std::function<Matrix(PointView)>;

enum class JacobianMode { analytic, central_difference };

/// Differentiates a map f: R^D -> R^K, either through a user-supplied K x D
/// matrix function or by central differences.
class JacobianProvider {
public:
    JacobianProvider() = default;

    static JacobianProvider analytic(std::size_t out_dim, std::size_t in_dim, VectorMap f,
                                     MatrixMap jacobian);
    /// `step` overrides the default h = max(1e-6, 1e-6 |x|_inf).
    static JacobianProvider central_difference(std::size_t out_dim, std::size_t in_dim, VectorMap f,
                                               std::optional<double> step = std::nullopt);

    JacobianMode mode() const noexcept { return mode_; }
    std::size_t out_dim() const noexcept { return out_dim_; }
    std::size_t in_dim() const noexcept { return in_dim_; }
    const VectorMap& map() const noexcept { return f_; }
    double step_at(PointView x) const;

    /// Same map, differentiated numerically (used to cross-check analytic
    /// providers).
    JacobianProvider as_central_difference(std::optional<double> step = std::nullopt) const;

private:
    friend Matrix jacobian_matrix(const JacobianProvider& provider, PointView x);

    JacobianMode mode_ = JacobianMode::central_difference;
    std::size_t out_dim_ = 0;
    std::size_t in_dim_ = 0;
    VectorMap f_;
    MatrixMap analytic_;
    std::optional<double> step_;
};

/// K x D matrix of partial derivatives at x. Throws non_differentiable_point
/// on non-finite entries.
Matrix jacobian_matrix(const JacobianProvider& provider, PointView x);

/// Singular values of a K x D matrix (K <= D), descending. Values below
/// 1e-12 times the largest are reported as exactly zero.
std::vector<double> singular_values(const Matrix& j);

/// Product of the singular values, i.e. sqrt(det(J J^T)); the local volume
/// scaling factor of a map from R^D down to R^K.
double nonsquare_jacobian_det(const Matrix& j);

/// 1/j for j > 0, and 0 for j == 0. Results too large for a double saturate
/// at the largest finite value instead of overflowing.
double guarded_reciprocal(double j);

} // namespace nmlc
