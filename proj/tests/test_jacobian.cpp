#include "nmlc/jacobian.hpp"
#include "nmlc/error.hpp"
#include "nmlc/zoo.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <random>

using namespace nmlc;

namespace {

JacobianProvider quadratic_form()
{
    VectorMap f = [](PointView x) { return Params{x[0] * x[0] + 4.0 * x[1] * x[1]}; };
    return JacobianProvider::analytic(1, 2, f, [](PointView x) {
        Matrix j(1, 2);
        j << 2.0 * x[0], 8.0 * x[1];
        return j;
    });
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
    return m;
}

} // namespace

TEST_CASE("jacobian_matrix examples")
{
    const Matrix j = jacobian_matrix(quadratic_form(), Point{1.0, 0.0});
    CHECK(j(0, 0) == 2.0);
    CHECK(j(0, 1) == 0.0);

    const auto expo = make_exponential(3);
    const Matrix m = jacobian_matrix(expo->mle_map().jacobian, Point{0.4, 2.0, 9.0});
    for (int d = 0; d < 3; ++d) CHECK(m(0, d) == doctest::Approx(1.0 / 3.0));

    const auto fd = quadratic_form().as_central_difference(1e-5);
    const Matrix a = jacobian_matrix(quadratic_form(), Point{0.3, 0.7});
    const Matrix b = jacobian_matrix(fd, Point{0.3, 0.7});
    CHECK(std::abs(a(0, 0) - b(0, 0)) < 1e-8);
    CHECK(std::abs(a(0, 1) - b(0, 1)) < 1e-8);
}

TEST_CASE("non-finite derivatives signal a non-differentiable point")
{
    VectorMap f = [](PointView x) { return Params{std::sqrt(std::abs(x[0]))}; };
    const auto p = JacobianProvider::analytic(1, 1, f, [](PointView x) {
        Matrix j(1, 1);
        j << 0.5 / std::sqrt(std::abs(x[0]));
        return j;
    });
    try {
        jacobian_matrix(p, Point{0.0});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_differentiable_point);
    }
}

TEST_CASE("default finite-difference step")
{
    const auto fd = quadratic_form().as_central_difference();
    CHECK(fd.step_at(Point{0.1, 0.2}) == 1e-6);
    CHECK(fd.step_at(Point{-300.0, 2.0}) == doctest::Approx(3e-4));
}

TEST_CASE("nonsquare_jacobian_det examples")
{
    Matrix row(1, 2);
    row << 2.0, 0.0;
    CHECK(nonsquare_jacobian_det(row) == doctest::Approx(2.0));

    Matrix two(2, 3);
    two << 1, 0, 0, 0, 1, 0;
    CHECK(nonsquare_jacobian_det(two) == doctest::Approx(1.0));

    Matrix flat(2, 3);
    flat << 1, 2, 3, 2, 4, 6;
    CHECK(nonsquare_jacobian_det(flat) == 0.0);

    const auto f = quadratic_form();
    for (double t : {0.0, std::numbers::pi / 4, std::numbers::pi / 2}) {
        const double th = 0.7;
        const Point x{std::sqrt(th) * std::cos(t), 0.5 * std::sqrt(th) * std::sin(t)};
        const double expected = 2.0 * std::sqrt(th) * std::sqrt(std::cos(t) * std::cos(t) + 4.0 * std::sin(t) * std::sin(t));
        CHECK(nonsquare_jacobian_det(jacobian_matrix(f, x)) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("guarded_reciprocal examples")
{
    CHECK(guarded_reciprocal(2.0) == 0.5);
    CHECK(guarded_reciprocal(0.0) == 0.0);
    const double big = guarded_reciprocal(1e-300);
    CHECK(std::isfinite(big));
    CHECK(big == doctest::Approx(1e300).epsilon(1e-12));
    CHECK(guarded_reciprocal(1e300) == doctest::Approx(1e-300).epsilon(1e-12));
    CHECK(std::isfinite(guarded_reciprocal(4.9e-324)));
}

TEST_CASE("square matrices reduce to the absolute determinant")
{
    std::mt19937_64 rng(21);
    for (std::size_t k = 1; k <= 6; ++k) {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix a = random_matrix(k, k, rng);
            const double det = std::abs(a.determinant());
            CHECK(std::abs(nonsquare_jacobian_det(a) - det) <= 1e-10 * std::max(1.0, det));
        }
    }
}

TEST_CASE("left-orthogonal invariance")
{
    std::mt19937_64 rng(22);
    for (std::size_t k = 1; k <= 4; ++k) {
        for (std::size_t d = k; d <= 8; ++d) {
            const Matrix j = random_matrix(k, d, rng);
            const Eigen::HouseholderQR<Matrix> qr(random_matrix(k, k, rng));
            const Matrix q = qr.householderQ();
            const double a = nonsquare_jacobian_det(j);
            const double b = nonsquare_jacobian_det(q * j);
            CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, a));
        }
    }
}

TEST_CASE("Gram determinant and singular-value product agree")
{
    std::mt19937_64 rng(23);
    for (std::size_t k = 1; k <= 4; ++k) {
        for (std::size_t d = k; d <= 8; ++d) {
            for (int trial = 0; trial < 5; ++trial) {
                const Matrix j = random_matrix(k, d, rng);
                const double gram = std::sqrt((j * j.transpose()).determinant());
                double prod = 1.0;
                for (double s : singular_values(j)) prod *= s;
                CHECK(std::abs(gram - prod) <= 1e-10 * std::max(1.0, gram));
                CHECK(std::abs(nonsquare_jacobian_det(j) - prod) <= 1e-10 * std::max(1.0, prod));
            }
        }
    }
}

TEST_CASE("finite-difference Jacobians of zoo estimators match the analytic ones")
{
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    std::vector<std::unique_ptr<ContinuousModel>> models;
    models.push_back(make_exponential(3));
    models.push_back(make_exponential_rate(2));
    models.push_back(make_gauss_mean(4));
    models.push_back(make_aniso_gauss_2d());
    for (const auto& m : models) {
        CAPTURE(m->id());
        const auto map = m->mle_map();
        const auto fd = map.jacobian.as_central_difference();
        for (int i = 0; i < 100; ++i) {
            Point x(map.data_dim());
            for (auto& v : x) v = u(rng);
            const Matrix a = jacobian_matrix(map.jacobian, x);
            const Matrix b = jacobian_matrix(fd, x);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5);
        }
    }
}

TEST_CASE("fiber chart Jacobians match finite differences")
{
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<std::unique_ptr<ContinuousModel>> models;
    for (int n : {2, 3, 5}) {
        models.push_back(make_exponential(n));
        models.push_back(make_exponential_rate(n));
    }
    models.push_back(make_gauss_mean(4));
    for (const auto& m : models) {
        CAPTURE(m->id());
        const auto chart = m->mle_map().chart(Params{1.3});
        REQUIRE(chart.codim > 0);
        const auto fd = chart.parametrization.as_central_difference();
        for (int i = 0; i < 20; ++i) {
            Point p(chart.codim);
            for (auto& v : p) v = u(rng);
            const Matrix a = jacobian_matrix(chart.parametrization, p);
            const Matrix b = jacobian_matrix(fd, p);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}
