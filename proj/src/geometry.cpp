#include "nmlc/geometry.hpp"

#include "nmlc/error.hpp"
#include "nmlc/zoo.hpp"
#include "json_number.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace nmlc {

namespace {

using nlohmann::json;

constexpr double kChartTol = 1e-9;
constexpr double kJacobianFloor = 1e-12;

double level_error(const LevelSetChart& chart, PointView x)
{
    const Params got = chart.estimator(x);
    double worst = 0.0;
    for (std::size_t k = 0; k < chart.level.size(); ++k)
        worst = std::max(worst, std::abs(got[k] - chart.level[k]) / std::max(1.0, std::abs(chart.level[k])));
    return worst;
}

// Deterministic pseudo-random points of the chart domain.
std::vector<Point> domain_samples(const Box& domain, std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Point> out(count, Point(domain.dim()));
    for (auto& u : out)
        for (std::size_t d = 0; d < domain.dim(); ++d)
            u[d] = domain.axes[d].lower + domain.axes[d].width() * unif(rng);
    return out;
}

double fiber_jacobian(const EstimatorMap& f, PointView x)
{
    return nonsquare_jacobian_det(jacobian_matrix(f.jacobian, x));
}

// Samples 10^4 fiber points across the level range and rejects maps whose
// Jacobian vanishes on a non-negligible fraction of them.
void check_nondegenerate(const EstimatorMap& f, const ChartFactory& charts, const Box& params)
{
    constexpr std::size_t kLevels = 100;
    constexpr std::size_t kPerLevel = 100;
    std::size_t total = 0;
    std::size_t degenerate = 0;
    std::mt19937_64 rng(0x0c0a2eaULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < kLevels; ++i) {
        Params level(params.dim());
        for (std::size_t d = 0; d < params.dim(); ++d) {
            const double frac = params.dim() == 1 ? (i + 0.5) / kLevels : unif(rng);
            level[d] = params.axes[d].lower + params.axes[d].width() * frac;
        }
        const LevelSetChart chart = charts(level);
        std::vector<Point> xs;
        if (chart.codim == 0) {
            xs = chart.points;
        } else {
            for (const auto& u : domain_samples(chart.domain, kPerLevel, 17 + i))
                xs.push_back(chart.parametrization.map()(u));
        }
        for (const auto& x : xs) {
            ++total;
            if (!(fiber_jacobian(f, x) > kJacobianFloor)) ++degenerate;
        }
    }
    if (total > 0 && static_cast<double>(degenerate) > 1e-4 * static_cast<double>(total))
        throw Error(ErrorCode::jacobian_degenerate,
                    "estimator Jacobian vanishes on " + std::to_string(degenerate) + " of " +
                        std::to_string(total) + " sampled fiber points");
}

QuadratureSpec tightened(const QuadratureSpec& quad, double outer_volume)
{
    QuadratureSpec inner = quad;
    inner.abs_tol = quad.abs_tol * 0.1 / std::max(1.0, outer_volume);
    inner.rel_tol = quad.rel_tol * 0.1;
    inner.tail_bound = 0.0;
    return inner;
}

} // namespace

void check_chart(const LevelSetChart& chart, std::size_t samples)
{
    if (!chart.estimator) throw Error(ErrorCode::invalid_argument, "chart carries no estimator to check against");
    if (chart.codim == 0) {
        if (chart.points.empty()) throw Error(ErrorCode::chart_inconsistent, "codimension-0 chart has no points");
        for (const auto& x : chart.points)
            if (level_error(chart, x) > kChartTol)
                throw Error(ErrorCode::chart_inconsistent, "chart point does not map to the chart level");
        return;
    }
    if (chart.domain.dim() != chart.codim || chart.parametrization.in_dim() != chart.codim)
        throw Error(ErrorCode::chart_inconsistent, "chart domain dimension differs from its codimension");
    for (const auto& u : domain_samples(chart.domain, samples, 0x5eedULL)) {
        const Point x = chart.parametrization.map()(u);
        if (level_error(chart, x) > kChartTol)
            throw Error(ErrorCode::chart_inconsistent, "chart point does not map to the chart level");
    }
}

IntegralResult hausdorff_integral(const LevelSetChart& chart, const Integrand& g, const QuadratureSpec& quad)
{
    check_chart(chart);
    if (chart.codim == 0) {
        KahanSum sum;
        for (const auto& x : chart.points) {
            const double v = g(x);
            if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_integrand, "fiber integrand is not finite");
            sum += v;
        }
        return {sum.value(), 0.0, chart.points.size()};
    }
    const auto& gamma = chart.parametrization;
    const Integrand on_domain = [&](PointView u) {
        const Point x = gamma.map()(u);
        const double value = g(x);
        if (!std::isfinite(value)) throw Error(ErrorCode::non_finite_integrand, "fiber integrand is not finite");
        if (value == 0.0) return 0.0;
        // dgamma is D x m; its transpose is m x D with m <= D.
        const Matrix tangent = jacobian_matrix(gamma, u).transpose();
        return value * nonsquare_jacobian_det(tangent);
    };
    return integrate(on_domain, chart.domain, quad);
}

IntegralResult coarea_lhs(const Integrand& h, const Box& box, const QuadratureSpec& quad)
{
    return integrate(h, box, quad);
}

IntegralResult coarea_rhs(const EstimatorMap& f, const Integrand& h, const ChartFactory& charts,
                          const Box& params, const QuadratureSpec& quad)
{
    if (f.param_dim() > f.data_dim())
        throw Error(ErrorCode::invalid_argument, "coarea needs K <= D");
    if (params.dim() != f.param_dim())
        throw Error(ErrorCode::invalid_argument, "parameter region dimension differs from K");
    if (!charts) throw Error(ErrorCode::no_chart, "no fiber charts supplied");
    check_nondegenerate(f, charts, params);

    const QuadratureSpec inner = tightened(quad, params.volume());
    const Integrand g = [&](PointView x) { return h(x) * guarded_reciprocal(fiber_jacobian(f, x)); };
    double worst_inner = 0.0;
    std::size_t nodes = 0;
    const Integrand fiber = [&](PointView level) {
        const IntegralResult r = hausdorff_integral(charts(level), g, inner);
        worst_inner = std::max(worst_inner, r.error_estimate);
        nodes += r.nodes_used;
        return r.value;
    };

    IntegralResult outer;
    if (params.dim() == 1) {
        outer = adaptive_integrate_1d([&](double t) { return fiber(std::span<const double>(&t, 1)); },
                                      params.axes[0], quad.abs_tol, quad.rel_tol, quad.initial_segments);
    } else {
        QuadratureSpec grid = quad;
        grid.method = QuadMethod::grid;
        outer = grid_integrate(fiber, params, grid);
    }
    outer.error_estimate += worst_inner * params.volume() + quad.tail_bound;
    outer.nodes_used = nodes;
    return outer;
}

IntegralResult naive_decomposition_rhs(const EstimatorMap& f, const Integrand& h, const Box& data_box,
                                       const Box& params, const QuadratureSpec& quad)
{
    if (params.dim() != 1) throw Error(ErrorCode::invalid_argument, "naive decomposition supports K = 1");
    QuadratureSpec grid = quad;
    grid.method = QuadMethod::grid;
    grid.resolution = std::min<std::size_t>(quad.resolution, 64);
    std::size_t nodes = 0;
    IntegralResult outer = adaptive_integrate_1d(
        [&](double level) {
            // Lebesgue integral of h restricted to the fiber {f(x) = level}.
            const IntegralResult inner = grid_integrate(
                [&](PointView x) { return f(x)[0] == level ? h(x) : 0.0; }, data_box, grid);
            nodes += inner.nodes_used;
            return inner.value;
        },
        params.axes[0], quad.abs_tol, quad.rel_tol);
    outer.nodes_used = nodes;
    return outer;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kE = std::numbers::e;
constexpr double kPi = std::numbers::pi;

QuadratureSpec precise(double tol)
{
    QuadratureSpec q;
    q.method = QuadMethod::adaptive_1d;
    q.abs_tol = tol;
    q.rel_tol = tol;
    return q;
}

CoareaReport finish(std::string id, double lhs, double rhs, double tolerance, json metadata)
{
    CoareaReport r;
    r.case_id = std::move(id);
    r.kind = CoareaCaseKind::coarea;
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_residual = std::abs(lhs - rhs);
    r.rel_residual = r.abs_residual / std::max(std::abs(lhs), 1e-300);
    r.tolerance = tolerance;
    r.passed = std::isfinite(r.rel_residual) && r.rel_residual < tolerance;
    r.metadata = std::move(metadata);
    return r;
}

json quad_meta(const IntegralResult& lhs, const IntegralResult& rhs)
{
    return {{"lhs_error_estimate", lhs.error_estimate},
            {"rhs_error_estimate", rhs.error_estimate},
            {"lhs_nodes", lhs.nodes_used},
            {"rhs_nodes", rhs.nodes_used}};
}

EstimatorMap identity_map()
{
    VectorMap f = [](PointView x) { return Params{x[0]}; };
    EstimatorMap e;
    e.jacobian = JacobianProvider::analytic(1, 1, f, [](PointView) { return Matrix(Matrix::Ones(1, 1)); });
    e.chart = [f](ParamView level) {
        LevelSetChart c;
        c.codim = 0;
        c.level.assign(level.begin(), level.end());
        c.points = {Point{level[0]}};
        c.estimator = f;
        return c;
    };
    return e;
}

CoareaReport identity_case()
{
    const EstimatorMap f = identity_map();
    const Integrand h = [](PointView x) { return x[0] >= 0.0 ? std::exp(-x[0]) : 0.0; };
    const Box box({{0.0, 40.0}});
    const auto q = precise(1e-13);
    const auto lhs = coarea_lhs(h, box, q);
    const auto rhs = coarea_rhs(f, h, f.chart, box, q);
    json meta = quad_meta(lhs, rhs);
    meta["expected"] = -std::expm1(-40.0);
    return finish("identity", lhs.value, rhs.value, 1e-10, std::move(meta));
}

CoareaReport ellipse_case()
{
    const auto model = make_aniso_gauss_2d();
    const EstimatorMap f = model->mle_map();
    const Params theta{1.0};
    const Integrand h = [&](PointView x) { return model->density(theta, x); };
    const auto q = precise(1e-11);
    // The box contains the fiber {q = 64} and both sides miss under 1e-27.
    const auto lhs = coarea_lhs(h, Box({{-8.0, 8.0}, {-4.0, 4.0}}), q);
    const auto rhs = coarea_rhs(f, h, f.chart, Box({{0.0, 64.0}}), q);
    json meta = quad_meta(lhs, rhs);
    meta["expected"] = 1.0;
    return finish("ellipse", lhs.value, rhs.value, 1e-6, std::move(meta));
}

CoareaReport annulus_case()
{
    const auto model = make_aniso_gauss_2d();
    const EstimatorMap f = model->mle_map();
    constexpr double inner_r = 0.5;
    constexpr double outer_r = 1.5;
    auto in_annulus = [](PointView x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return r2 >= inner_r * inner_r && r2 <= outer_r * outer_r;
    };
    // h = 1_A Jf, so the right side integrates H^1(A ∩ fiber).
    const Integrand h = [&](PointView x) { return in_annulus(x) ? fiber_jacobian(f, x) : 0.0; };
    const auto q = precise(1e-9);
    const auto lhs = coarea_lhs(h, Box({{-outer_r, outer_r}, {-outer_r, outer_r}}), q);
    // Ellipse {q = t} has |x|^2 in [t/4, t]; it meets A only for t in [r1^2, 4 r2^2].
    const auto rhs = coarea_rhs(f, h, f.chart, Box({{inner_r * inner_r, 4.0 * outer_r * outer_r}}), q);
    return finish("annulus", lhs.value, rhs.value, 1e-5, quad_meta(lhs, rhs));
}

// MLE-plugin likelihood times an indicator luckiness, for the exponential model.
Integrand exponential_plugin(const ContinuousModel& model, double lower, double upper)
{
    return [&model, lower, upper](PointView x) {
        const MleResult m = model.mle(x);
        if (m.boundary || m.theta[0] < lower || m.theta[0] > upper) return 0.0;
        return model.density(m.theta, x);
    };
}

CoareaReport exponential_mean_case()
{
    const auto model = make_exponential(2);
    const EstimatorMap f = model->mle_map();
    const Integrand h = exponential_plugin(*model, 1.0, kE);
    const auto q = precise(1e-9);
    const auto lhs = coarea_lhs(h, Box::cube(2, 0.0, 2.0 * kE), q);
    const auto rhs = coarea_rhs(f, h, f.chart, Box({{1.0, kE}}), q);
    json meta = quad_meta(lhs, rhs);
    meta["expected"] = 4.0 * std::exp(-2.0);
    return finish("exponential-mean", lhs.value, rhs.value, 1e-5, std::move(meta));
}

CoareaReport exponential_point_case()
{
    const auto model = make_exponential(1);
    const EstimatorMap f = model->mle_map();
    const Integrand h = exponential_plugin(*model, 1.0, kE);
    const auto q = precise(1e-12);
    const auto lhs = coarea_lhs(h, Box({{0.0, kE}}), q);
    const auto rhs = coarea_rhs(f, h, f.chart, Box({{1.0, kE}}), q);
    json meta = quad_meta(lhs, rhs);
    meta["expected"] = std::exp(-1.0);
    return finish("exponential-point", lhs.value, rhs.value, 1e-10, std::move(meta));
}

CoareaReport naive_report(std::string id, double lhs, double rhs, json meta)
{
    CoareaReport r;
    r.case_id = std::move(id);
    r.kind = CoareaCaseKind::naive_decomposition;
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_residual = std::abs(lhs - rhs);
    r.rel_residual = r.abs_residual / std::max(std::abs(lhs), 1e-300);
    r.tolerance = 0.0;
    r.passed = rhs == 0.0 && lhs > 0.9;
    r.metadata = std::move(meta);
    return r;
}

CoareaReport naive_ellipse_case()
{
    const auto model = make_aniso_gauss_2d();
    const EstimatorMap f = model->mle_map();
    const Params theta{1.0};
    const Integrand h = [&](PointView x) { return model->density(theta, x); };
    const Box data_box({{-8.0, 8.0}, {-4.0, 4.0}});
    auto q = precise(1e-10);
    q.resolution = 64;
    const auto lhs = coarea_lhs(h, data_box, q);
    const auto rhs = naive_decomposition_rhs(f, h, data_box, Box({{0.0, 64.0}}), q);
    return naive_report("naive-ellipse", lhs.value, rhs.value, quad_meta(lhs, rhs));
}

CoareaReport naive_exponential_case()
{
    const auto model = make_exponential(1);
    const EstimatorMap f = model->mle_map();
    const Params theta{1.0};
    const Integrand h = [&](PointView x) { return model->density(theta, x); };
    const Box data_box({{0.0, 40.0}});
    auto q = precise(1e-10);
    q.resolution = 64;
    const auto lhs = coarea_lhs(h, data_box, q);
    const auto rhs = naive_decomposition_rhs(f, h, data_box, data_box, q);
    return naive_report("naive-exponential", lhs.value, rhs.value, quad_meta(lhs, rhs));
}

} // namespace

std::vector<std::string> coarea_case_ids()
{
    return {"identity", "ellipse", "annulus", "exponential-mean", "exponential-point",
            "naive-ellipse", "naive-exponential"};
}

CoareaReport verify_coarea(std::string_view case_id)
{
    if (case_id == "identity") return identity_case();
    if (case_id == "ellipse") return ellipse_case();
    if (case_id == "annulus") return annulus_case();
    if (case_id == "exponential-mean") return exponential_mean_case();
    if (case_id == "exponential-point") return exponential_point_case();
    if (case_id == "naive-ellipse") return naive_ellipse_case();
    if (case_id == "naive-exponential") return naive_exponential_case();
    throw Error(ErrorCode::invalid_argument, "unknown verification case: " + std::string(case_id));
}

json to_json(const CoareaReport& r)
{
    return {{"case", r.case_id},
            {"kind", r.kind == CoareaCaseKind::coarea ? "coarea" : "naive-decomposition"},
            {"lhs", detail::report_number(r.lhs)},
            {"rhs", detail::report_number(r.rhs)},
            {"abs_residual", detail::report_number(r.abs_residual)},
            {"rel_residual", detail::report_number(r.rel_residual)},
            {"tolerance", r.tolerance},
            {"passed", r.passed},
            {"quadrature", r.metadata}};
}

} // namespace nmlc
