#include "nmlc/error.hpp"
#include "nmlc/geometry.hpp"
#include "nmlc/zoo.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nmlc;

namespace {

constexpr double kPi = std::numbers::pi;

QuadratureSpec tight(double tol = 1e-12)
{
    QuadratureSpec q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    return q;
}

VectorMap radius_map()
{
    return [](PointView x) { return Params{std::hypot(x[0], x[1])}; };
}

// Circle of radius r traced through t = phi(u) over u in [0, 2 pi].
LevelSetChart circle_chart(double r, bool warped)
{
    LevelSetChart c;
    c.codim = 1;
    c.level = {r};
    c.domain = Box({{0.0, 2.0 * kPi}});
    c.estimator = radius_map();
    auto phi = [warped](double u) { return warped ? u * u / (2.0 * kPi) : u; };
    auto dphi = [warped](double u) { return warped ? u / kPi : 1.0; };
    c.parametrization = JacobianProvider::analytic(
        2, 1, [r, phi](PointView u) { return Point{r * std::cos(phi(u[0])), r * std::sin(phi(u[0]))}; },
        [r, phi, dphi](PointView u) {
            Matrix j(2, 1);
            j << -r * std::sin(phi(u[0])) * dphi(u[0]), r * std::cos(phi(u[0])) * dphi(u[0]);
            return j;
        });
    return c;
}

} // namespace

TEST_CASE("hausdorff_integral examples")
{
    const auto circle = hausdorff_integral(circle_chart(1.0, false), [](PointView) { return 1.0; }, tight());
    CHECK(std::abs(circle.value - 2.0 * kPi) <= 1e-8);

    const auto aniso = make_aniso_gauss_2d();
    const auto map = aniso->mle_map();
    const Integrand g = [&](PointView x) {
        return aniso->density(Params{1.0}, x) * guarded_reciprocal(nonsquare_jacobian_det(jacobian_matrix(map.jacobian, x)));
    };
    const auto ellipse = hausdorff_integral(map.chart(Params{0.5}), g, tight());
    CHECK(std::abs(ellipse.value - std::exp(-0.5)) <= 1e-7);

    const auto expo = make_exponential(1);
    const auto emap = expo->mle_map();
    const auto point = hausdorff_integral(emap.chart(Params{0.7}),
                                          [&](PointView x) { return expo->density(Params{1.3}, x); }, tight());
    CHECK(point.value == doctest::Approx(std::exp(-0.7 / 1.3) / 1.3).epsilon(1e-15));
}

TEST_CASE("chart consistency is enforced")
{
    LevelSetChart bad = circle_chart(1.0, false);
    bad.level = {1.01};
    try {
        hausdorff_integral(bad, [](PointView) { return 1.0; }, tight());
        FAIL("expected chart_inconsistent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::chart_inconsistent);
    }
    CHECK_NOTHROW(check_chart(circle_chart(2.5, true)));

    const auto expo = make_exponential(3);
    for (double level : {0.1, 1.0, 7.5}) CHECK_NOTHROW(check_chart(expo->mle_map().chart(Params{level})));
    const auto gauss = make_gauss_mean(3);
    for (double level : {-2.0, 0.0, 3.5}) CHECK_NOTHROW(check_chart(gauss->mle_map().chart(Params{level})));
}

TEST_CASE("non-finite fiber integrands are rejected")
{
    try {
        hausdorff_integral(circle_chart(1.0, false), [](PointView) { return std::nan(""); }, tight());
        FAIL("expected non_finite_integrand");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite_integrand);
    }
}

TEST_CASE("chart reparametrization invariance")
{
    const Integrand g = [](PointView x) { return std::exp(x[0]) * (1.0 + x[1] * x[1]); };
    const QuadratureSpec q = tight(1e-10);
    const auto a = hausdorff_integral(circle_chart(1.5, false), g, q);
    const auto b = hausdorff_integral(circle_chart(1.5, true), g, q);
    CHECK(std::abs(a.value - b.value) <= 2.0 * 1e-10 * std::abs(a.value));
}

TEST_CASE("curve length matches a dense polyline")
{
    const auto chart = make_aniso_gauss_2d()->mle_map().chart(Params{0.8});
    const auto length = hausdorff_integral(chart, [](PointView) { return 1.0; }, tight());
    constexpr int kSegments = 200000;
    const auto& gamma = chart.parametrization.map();
    double poly = 0.0;
    Point prev = gamma(Point{0.0});
    for (int i = 1; i <= kSegments; ++i) {
        const Point next = gamma(Point{2.0 * kPi * i / kSegments});
        poly += std::hypot(next[0] - prev[0], next[1] - prev[1]);
        prev = next;
    }
    CHECK(std::abs(length.value - poly) <= 1e-6 * poly);
}

TEST_CASE("coarea_lhs examples")
{
    const auto aniso = make_aniso_gauss_2d();
    const auto norm = coarea_lhs([&](PointView x) { return aniso->density(Params{1.0}, x); },
                                 Box({{-8.0, 8.0}, {-4.0, 4.0}}), tight(1e-10));
    CHECK(std::abs(norm.value - 1.0) <= 1e-6);

    const auto unit = coarea_lhs([](PointView) { return 1.0; }, Box::cube(2, 0.0, 1.0), tight());
    CHECK(std::abs(unit.value - 1.0) <= 1e-12);

    const auto expo = make_exponential(2);
    const auto v = Luckiness::indicator(1.0, std::numbers::e);
    const Integrand plug = [&](PointView x) {
        const Params t = expo->mle(x).theta;
        return v(t) * expo->density(t, x);
    };
    const auto r = coarea_lhs(plug, Box::cube(2, 0.0, 2.0 * std::numbers::e), tight(1e-10));
    CHECK(std::abs(r.value - 4.0 * std::exp(-2.0)) <= 1e-9);
}

TEST_CASE("coarea_rhs examples")
{
    const auto aniso = make_aniso_gauss_2d();
    const auto map = aniso->mle_map();
    const auto rhs = coarea_rhs(map, [&](PointView x) { return aniso->density(Params{1.0}, x); }, map.chart,
                                Box({{0.0, 64.0}}), tight(1e-10));
    CHECK(std::abs(rhs.value - 1.0) <= 1e-6);

    const auto expo = make_exponential(2);
    const auto emap = expo->mle_map();
    const auto v = Luckiness::indicator(1.0, std::numbers::e);
    const Integrand plug = [&](PointView x) {
        const Params t = expo->mle(x).theta;
        return v(t) * expo->density(t, x);
    };
    const auto r = coarea_rhs(emap, plug, emap.chart, Box({{1.0, std::numbers::e}}), tight(1e-10));
    CHECK(std::abs(r.value - 4.0 * std::exp(-2.0)) <= 1e-5);
}

TEST_CASE("degenerate Jacobians are detected")
{
    VectorMap flat = [](PointView x) { return Params{0.0 * x[0]}; };
    EstimatorMap f;
    f.jacobian = JacobianProvider::analytic(1, 1, flat, [](PointView) { return Matrix(Matrix::Zero(1, 1)); });
    f.chart = [flat](ParamView level) {
        LevelSetChart c;
        c.codim = 0;
        c.level.assign(level.begin(), level.end());
        c.points = {Point{level[0]}};
        c.estimator = flat;
        return c;
    };
    try {
        coarea_rhs(f, [](PointView) { return 1.0; }, f.chart, Box({{0.0, 1.0}}), tight(1e-8));
        FAIL("expected jacobian_degenerate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::jacobian_degenerate);
    }
}

TEST_CASE("registered coarea cases")
{
    for (const auto& id : coarea_case_ids()) {
        CAPTURE(id);
        const auto r = verify_coarea(id);
        CHECK(r.passed);
        CHECK(std::isfinite(r.abs_residual));
        CHECK(std::isfinite(r.rel_residual));
        if (r.kind == CoareaCaseKind::naive_decomposition) {
            CHECK(r.rhs == 0.0);
            CHECK(r.lhs > 0.9);
        }
    }
    CHECK_THROWS_AS(verify_coarea("nope"), Error);
}
