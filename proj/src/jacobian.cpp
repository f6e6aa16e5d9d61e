#include "nmlc/jacobian.hpp"

#include "nmlc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nmlc {

namespace {

constexpr double kRankTol = 1e-12;

void require_finite(const Matrix& m)
{
    if (!m.allFinite())
        throw Error(ErrorCode::non_differentiable_point, "Jacobian has non-finite entries");
}

// Eigenvalues of a symmetric 3x3 matrix (trigonometric solution), descending.
std::vector<double> sym3_eigenvalues(const Eigen::Matrix3d& a)
{
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double q = a.trace() / 3.0;
    if (p1 == 0.0) {
        std::vector<double> ev = {a(0, 0), a(1, 1), a(2, 2)};
        std::sort(ev.rbegin(), ev.rend());
        return ev;
    }
    const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                      (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const Eigen::Matrix3d b = (a - q * Eigen::Matrix3d::Identity()) / p;
    const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    std::vector<double> ev = {e1, e2, e3};
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

// Singular values and their product through the K x K Gram matrix (K <= 3).
std::pair<std::vector<double>, double> gram_route(const Matrix& j)
{
    const auto k = j.rows();
    if (k == 1) {
        const double n = j.row(0).norm();
        return {{n}, n};
    }
    const Matrix g = j * j.transpose();
    const double det = std::max(0.0, g.determinant());
    const double product = std::sqrt(det);
    std::vector<double> sv;
    if (k == 2) {
        const double half_tr = 0.5 * (g(0, 0) + g(1, 1));
        const double disc = std::hypot(0.5 * (g(0, 0) - g(1, 1)), g(0, 1));
        const double s1 = std::sqrt(std::max(0.0, half_tr + disc));
        sv = {s1, s1 > 0.0 ? product / s1 : 0.0};
    } else {
        const auto ev = sym3_eigenvalues(g);
        const double s1 = std::sqrt(std::max(0.0, ev[0]));
        const double s2 = std::sqrt(std::max(0.0, ev[1]));
        sv = {s1, s2, (s1 > 0.0 && s2 > 0.0) ? product / (s1 * s2) : 0.0};
    }
    return {sv, product};
}

} // namespace

JacobianProvider JacobianProvider::analytic(std::size_t out_dim, std::size_t in_dim, VectorMap f,
                                            MatrixMap jacobian)
{
    if (!jacobian) throw Error(ErrorCode::invalid_argument, "analytic provider needs a matrix function");
    JacobianProvider p;
    p.mode_ = JacobianMode::analytic;
    p.out_dim_ = out_dim;
    p.in_dim_ = in_dim;
    p.f_ = std::move(f);
    p.analytic_ = std::move(jacobian);
    return p;
}

JacobianProvider JacobianProvider::central_difference(std::size_t out_dim, std::size_t in_dim,
                                                      VectorMap f, std::optional<double> step)
{
    if (step && !(*step > 0.0))
        throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
    if (!f) throw Error(ErrorCode::invalid_argument, "finite-difference provider needs a map");
    JacobianProvider p;
    p.mode_ = JacobianMode::central_difference;
    p.out_dim_ = out_dim;
    p.in_dim_ = in_dim;
    p.f_ = std::move(f);
    p.step_ = step;
    return p;
}

JacobianProvider JacobianProvider::as_central_difference(std::optional<double> step) const
{
    return central_difference(out_dim_, in_dim_, f_, step);
}

double JacobianProvider::step_at(PointView x) const
{
    if (step_) return *step_;
    double norm = 0.0;
    for (double v : x) norm = std::max(norm, std::abs(v));
    return std::max(1e-6, 1e-6 * norm);
}

Matrix jacobian_matrix(const JacobianProvider& provider, PointView x)
{
    if (x.size() != provider.in_dim())
        throw Error(ErrorCode::invalid_argument, "point dimension does not match the map");
    const auto rows = static_cast<Eigen::Index>(provider.out_dim());
    const auto cols = static_cast<Eigen::Index>(provider.in_dim());

    if (provider.mode_ == JacobianMode::analytic) {
        Matrix m = provider.analytic_(x);
        if (m.rows() != rows || m.cols() != cols)
            throw Error(ErrorCode::invalid_argument, "analytic Jacobian has the wrong shape");
        require_finite(m);
        return m;
    }

    const double h = provider.step_at(x);
    Matrix m(rows, cols);
    Point probe(x.begin(), x.end());
    for (Eigen::Index d = 0; d < cols; ++d) {
        const double orig = probe[d];
        probe[d] = orig + h;
        const Params up = provider.f_(probe);
        probe[d] = orig - h;
        const Params down = provider.f_(probe);
        probe[d] = orig;
        for (Eigen::Index k = 0; k < rows; ++k) m(k, d) = (up[k] - down[k]) / (2.0 * h);
    }
    require_finite(m);
    return m;
}

std::vector<double> singular_values(const Matrix& j)
{
    if (j.rows() == 0 || j.rows() > j.cols())
        throw Error(ErrorCode::invalid_argument, "singular values need a K x D matrix with 1 <= K <= D");
    require_finite(j);
    std::vector<double> sv;
    if (j.rows() <= 3) {
        sv = gram_route(j).first;
    } else {
        Eigen::JacobiSVD<Matrix> svd(j);
        const auto& s = svd.singularValues();
        sv.assign(s.data(), s.data() + s.size());
    }
    const double top = sv.empty() ? 0.0 : sv.front();
    for (auto& s : sv)
        if (s < kRankTol * top) s = 0.0;
    return sv;
}

double nonsquare_jacobian_det(const Matrix& j)
{
    const auto sv = singular_values(j);
    if (sv.back() == 0.0) return 0.0;
    if (j.rows() <= 3) return gram_route(j).second;
    double p = 1.0;
    for (double s : sv) p *= s;
    return p;
}

double guarded_reciprocal(double j)
{
    if (!(j >= 0.0)) throw Error(ErrorCode::invalid_argument, "guarded reciprocal needs j >= 0");
    if (j == 0.0) return 0.0;
    if (j > 1e-150 && j < 1e150) return 1.0 / j;
    const double log_r = -std::log(j);
    if (log_r >= std::log(std::numeric_limits<double>::max())) return std::numeric_limits<double>::max();
    return std::exp(log_r);
}

} // namespace nmlc
