#include "nmlc/zoo.hpp"

#include "nmlc/error.hpp"
#include "special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace nmlc {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

void require_param(const Model& m, ParamView theta)
{
    if (!m.param_space().contains(theta))
        throw Error(ErrorCode::out_of_domain, "parameter lies outside the parameter space of " + m.id());
}

double sum_of(PointView x)
{
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

// Where sum(x) with x[axis] = t reaches `target`.
std::vector<double> sum_crossing(PointView x, std::size_t axis, double target)
{
    return {target - (sum_of(x) - x[axis])};
}

// Exact while the result stays below 2^53.
double binomial(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return std::round(r);
}

std::string with_n(const std::string& base, int n)
{
    std::ostringstream out;
    out << base << " (N=" << n << ")";
    return out.str();
}

// Stick-breaking chart of the simplex {x >= 0, sum x = total} in R^n,
// n >= 2, over the unit cube [0,1]^(n-1).
LevelSetChart simplex_chart(int n, double total, Params level, VectorMap estimator)
{
    LevelSetChart chart;
    chart.level = std::move(level);
    chart.estimator = std::move(estimator);
    if (n == 1) {
        chart.codim = 0;
        chart.points = {Point{total}};
        return chart;
    }
    const auto m = static_cast<std::size_t>(n - 1);
    chart.codim = m;
    chart.domain = Box::cube(m, 0.0, 1.0);
    auto gamma = [n, total](PointView u) {
        Point x(static_cast<std::size_t>(n));
        double rest = total;
        for (int j = 0; j + 1 < n; ++j) {
            x[j] = rest * u[j];
            rest *= 1.0 - u[j];
        }
        x[n - 1] = rest;
        return x;
    };
    auto dgamma = [n, total](PointView u) {
        // x_j = total * prod_{i<j}(1 - u_i) * (u_j, or 1 for the last coordinate).
        Matrix jac = Matrix::Zero(n, n - 1);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k <= j && k + 1 < n; ++k) {
                double d = total;
                for (int i = 0; i < j; ++i) {
                    if (i == k) d *= -1.0;
                    else d *= 1.0 - u[i];
                }
                if (j + 1 < n && k != j) d *= u[j];
                jac(j, k) = d;
            }
        }
        return jac;
    };
    chart.parametrization = JacobianProvider::analytic(static_cast<std::size_t>(n), m, gamma, dgamma);
    return chart;
}

// ---------------------------------------------------------------------------

class Bernoulli final : public DiscreteModel {
public:
    explicit Bernoulli(int n)
        : DiscreteModel(DataSpace::discrete(static_cast<std::size_t>(n), 2), ParamSpace{1, {{0.0, 1.0}}}),
          n_(n)
    {
    }

    std::string id() const override { return "bernoulli"; }
    std::string description() const override { return with_n("Bernoulli sequence", n_); }

    double density(ParamView theta, PointView x) const override
    {
        const double k = sum_of(x);
        return std::pow(theta[0], k) * std::pow(1.0 - theta[0], n_ - k);
    }

    MleResult mle(PointView x) const override { return {{sum_of(x) / n_}, false}; }

    RationalParams mle_rational(PointView x) const override
    {
        return RationalParams::make({std::llround(sum_of(x))}, n_);
    }

    std::vector<Point> sample(ParamView theta, std::uint64_t seed, std::size_t count) const override
    {
        require_param(*this, theta);
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution coin(theta[0]);
        std::vector<Point> out(count, Point(static_cast<std::size_t>(n_)));
        for (auto& x : out)
            for (auto& v : x) v = coin(rng) ? 1.0 : 0.0;
        return out;
    }

    bool has_sufficient_stat() const noexcept override { return true; }
    Point sufficient_stat(PointView x) const override { return {sum_of(x)}; }
    Params mle_from_stat(PointView s) const override { return {s[0] / n_}; }

    std::optional<double> sufficient_stat_pmf(ParamView theta, PointView s) const override
    {
        const int k = static_cast<int>(std::lround(s[0]));
        return binomial(n_, k) * std::pow(theta[0], k) * std::pow(1.0 - theta[0], n_ - k);
    }

private:
    int n_;
};

class Multinomial final : public DiscreteModel {
public:
    Multinomial(int categories, int n)
        : DiscreteModel(DataSpace::discrete(static_cast<std::size_t>(n), static_cast<std::size_t>(categories)),
                        ParamSpace{static_cast<std::size_t>(categories - 1),
                                   std::vector<Interval>(static_cast<std::size_t>(categories - 1), {0.0, 1.0}),
                                   true}),
          m_(categories), n_(n)
    {
    }

    std::string id() const override { return "multinomial"; }
    std::string description() const override
    {
        std::ostringstream out;
        out << "categorical sequence (m=" << m_ << ", N=" << n_ << ")";
        return out.str();
    }

    double density(ParamView theta, PointView x) const override
    {
        const auto counts = count(x);
        return pmf_of_counts(theta, counts, 1.0);
    }

    MleResult mle(PointView x) const override { return {mle_rational(x).to_double(), false}; }

    RationalParams mle_rational(PointView x) const override
    {
        const auto counts = count(x);
        std::vector<long long> num(counts.begin(), counts.end() - 1);
        return RationalParams::make(std::move(num), n_);
    }

    std::vector<Point> sample(ParamView theta, std::uint64_t seed, std::size_t count) const override
    {
        require_param(*this, theta);
        std::vector<double> probs(theta.begin(), theta.end());
        probs.push_back(std::max(0.0, 1.0 - sum_of(theta)));
        std::mt19937_64 rng(seed);
        std::discrete_distribution<int> pick(probs.begin(), probs.end());
        std::vector<Point> out(count, Point(static_cast<std::size_t>(n_)));
        for (auto& x : out)
            for (auto& v : x) v = pick(rng);
        return out;
    }

    bool has_sufficient_stat() const noexcept override { return true; }

    Point sufficient_stat(PointView x) const override
    {
        const auto c = count(x);
        return Point(c.begin(), c.end());
    }

    Params mle_from_stat(PointView s) const override
    {
        Params p(s.begin(), s.end() - 1);
        for (auto& v : p) v /= n_;
        return p;
    }

    std::optional<double> sufficient_stat_pmf(ParamView theta, PointView s) const override
    {
        std::vector<long long> counts(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) counts[j] = std::llround(s[j]);
        double coef = 1.0;
        int remaining = n_;
        for (auto c : counts) {
            coef *= binomial(remaining, static_cast<int>(c));
            remaining -= static_cast<int>(c);
        }
        return pmf_of_counts(theta, counts, coef);
    }

private:
    std::vector<long long> count(PointView x) const
    {
        std::vector<long long> c(static_cast<std::size_t>(m_), 0);
        for (double v : x) ++c[static_cast<std::size_t>(v)];
        return c;
    }

    double pmf_of_counts(ParamView theta, const std::vector<long long>& counts, double coef) const
    {
        double p = coef;
        double last = 1.0;
        for (std::size_t j = 0; j + 1 < counts.size(); ++j) {
            p *= std::pow(theta[j], static_cast<double>(counts[j]));
            last -= theta[j];
        }
        return p * std::pow(std::max(0.0, last), static_cast<double>(counts.back()));
    }

    int m_;
    int n_;
};

// ---------------------------------------------------------------------------

/// Shared pieces of the mean-parametrized exponential family models.
class ExponentialBase : public ContinuousModel {
public:
    ExponentialBase(int n, Interval theta_range)
        : ContinuousModel(DataSpace::continuous(std::vector<Interval>(static_cast<std::size_t>(n), {0.0, inf})),
                          ParamSpace{1, {theta_range}}),
          n_(n)
    {
    }

    double density(ParamView theta, PointView x) const override
    {
        for (double v : x)
            if (v < 0.0) return 0.0;
        const double s = sum_of(x);
        if (theta[0] == 0.0) return s == 0.0 ? inf : 0.0;
        return std::exp(-n_ * std::log(theta[0]) - s / theta[0]);
    }

    double log_density(ParamView theta, PointView x) const override
    {
        for (double v : x)
            if (v < 0.0) return -inf;
        const double s = sum_of(x);
        if (theta[0] == 0.0) return s == 0.0 ? inf : -inf;
        return -n_ * std::log(theta[0]) - s / theta[0];
    }

    std::vector<Point> sample(ParamView theta, std::uint64_t seed, std::size_t count) const override
    {
        require_param(*this, theta);
        std::mt19937_64 rng(seed);
        std::exponential_distribution<double> draw(1.0 / theta[0]);
        std::vector<Point> out(count, Point(static_cast<std::size_t>(n_)));
        for (auto& x : out)
            for (auto& v : x) v = draw(rng);
        return out;
    }

    bool has_sufficient_stat() const noexcept override { return true; }
    Point sufficient_stat(PointView x) const override { return {sum_of(x)}; }

    std::vector<double> mle_crossings(PointView x, std::size_t axis, double level) const override
    {
        return sum_crossing(x, axis, n_ * level);
    }

protected:
    // Gamma(N, theta/N) density of the sample mean.
    double mean_pdf(double theta, double mean) const
    {
        if (!(mean > 0.0) || !(theta > 0.0)) return 0.0;
        return std::exp(detail::log_gamma_pdf(n_, theta / n_, mean));
    }

    int n_;
};

class Exponential final : public ExponentialBase {
public:
    explicit Exponential(int n) : ExponentialBase(n, {0.0, inf}) {}

    std::string id() const override { return "exponential"; }
    std::string description() const override { return with_n("exponential, mean parameter", n_); }

    MleResult mle(PointView x) const override
    {
        const double s = sum_of(x);
        return {{s / n_}, s == 0.0};
    }

    Params mle_from_stat(PointView s) const override { return {s[0] / n_}; }

    EstimatorMap mle_map() const override
    {
        const int n = n_;
        VectorMap f = [n](PointView x) { return Params{sum_of(x) / n}; };
        EstimatorMap e;
        e.jacobian = JacobianProvider::analytic(1, static_cast<std::size_t>(n), f, [n](PointView) {
            return Matrix(Matrix::Constant(1, n, 1.0 / n));
        });
        e.chart = [n, f](ParamView level) {
            if (!(level[0] > 0.0)) throw Error(ErrorCode::no_chart, "exponential fibers need level > 0");
            return simplex_chart(n, n * level[0], Params(level.begin(), level.end()), f);
        };
        return e;
    }

    TruncatedBox truncation(const Luckiness& v, double) const override
    {
        const auto& support = v.support();
        if (!support || !(support->axes[0].lower > 0.0) || !std::isfinite(support->axes[0].upper))
            throw Error(ErrorCode::divergent,
                        "the MLE-plugin integral of the exponential model diverges unless the "
                        "luckiness vanishes outside a compact [a, b] with a > 0");
        // Plug-in mass lives on sum x <= N b.
        const double edge = n_ * support->axes[0].upper;
        return {Box::cube(static_cast<std::size_t>(n_), 0.0, edge), 0.0,
                std::vector<double>(static_cast<std::size_t>(n_), 4.0)};
    }

    std::optional<double> closed_form_pushforward_pdf(ParamView src, ParamView eval) const override
    {
        return mean_pdf(src[0], eval[0]);
    }
};

class ExponentialClamped final : public ExponentialBase {
public:
    ExponentialClamped(int n, double lower, double upper)
        : ExponentialBase(n, {lower, upper}), lower_(lower), upper_(upper)
    {
        if (!(lower > 0.0) || !(lower < upper) || !std::isfinite(upper))
            throw Error(ErrorCode::invalid_argument, "clamp interval must satisfy 0 < lower < upper < inf");
    }

    std::string id() const override { return "exponential-clamped"; }
    std::string description() const override
    {
        std::ostringstream out;
        out.precision(17);
        out << "exponential restricted to theta in [" << lower_ << ", " << upper_ << "] (N=" << n_ << ")";
        return out.str();
    }

    MleResult mle(PointView x) const override { return {{clamp(sum_of(x) / n_)}, false}; }
    Params mle_from_stat(PointView s) const override { return {clamp(s[0] / n_)}; }

    EstimatorMap mle_map() const override
    {
        const int n = n_;
        const double lo = lower_;
        const double hi = upper_;
        VectorMap f = [n, lo, hi](PointView x) { return Params{std::clamp(sum_of(x) / n, lo, hi)}; };
        EstimatorMap e;
        e.jacobian = JacobianProvider::analytic(1, static_cast<std::size_t>(n), f, [n, lo, hi](PointView x) {
            const double mean = sum_of(x) / n;
            const double slope = (mean > lo && mean < hi) ? 1.0 / n : 0.0;
            return Matrix(Matrix::Constant(1, n, slope));
        });
        e.chart = [n, lo, hi, f](ParamView level) {
            if (!(level[0] > lo && level[0] < hi))
                throw Error(ErrorCode::no_chart, "clamped fibers at or beyond the clamp ends have positive volume");
            return simplex_chart(n, n * level[0], Params(level.begin(), level.end()), f);
        };
        return e;
    }

    TruncatedBox truncation(const Luckiness&, double tail_tol) const override
    {
        // Where some x_i > L >= N b the plug-in is the Exp(b)^N density, so the
        // omitted mass is at most N exp(-L / b).
        const double edge = std::max(n_ * upper_, upper_ * std::log(n_ / tail_tol));
        const double tail = n_ * std::exp(-edge / upper_);
        return {Box::cube(static_cast<std::size_t>(n_), 0.0, edge), tail,
                std::vector<double>(static_cast<std::size_t>(n_), 2.0)};
    }

    std::optional<double> closed_form_pushforward_pdf(ParamView src, ParamView eval) const override
    {
        if (!(eval[0] > lower_ && eval[0] < upper_)) return 0.0;
        return mean_pdf(src[0], eval[0]);
    }

    std::vector<EstimatorAtom> estimator_atoms(ParamView src) const override
    {
        const double theta = src[0];
        return {{{lower_}, detail::regularized_gamma_p(n_, n_ * lower_ / theta)},
                {{upper_}, detail::regularized_gamma_q(n_, n_ * upper_ / theta)}};
    }

private:
    double clamp(double v) const { return std::clamp(v, lower_, upper_); }

    double lower_;
    double upper_;
};

class ExponentialRate final : public ContinuousModel {
public:
    explicit ExponentialRate(int n)
        : ContinuousModel(DataSpace::continuous(std::vector<Interval>(static_cast<std::size_t>(n), {0.0, inf})),
                          ParamSpace{1, {{0.0, inf}}}),
          n_(n)
    {
    }

    std::string id() const override { return "exponential-rate"; }
    std::string description() const override { return with_n("exponential, rate parameter", n_); }

    double density(ParamView theta, PointView x) const override { return std::exp(log_density(theta, x)); }

    double log_density(ParamView theta, PointView x) const override
    {
        for (double v : x)
            if (v < 0.0) return -inf;
        const double s = sum_of(x);
        if (std::isinf(theta[0])) return s == 0.0 ? inf : -inf;
        if (theta[0] == 0.0) return -inf;
        return n_ * std::log(theta[0]) - theta[0] * s;
    }

    MleResult mle(PointView x) const override
    {
        const double s = sum_of(x);
        return {{s > 0.0 ? n_ / s : inf}, s == 0.0};
    }

    std::vector<Point> sample(ParamView theta, std::uint64_t seed, std::size_t count) const override
    {
        require_param(*this, theta);
        std::mt19937_64 rng(seed);
        std::exponential_distribution<double> draw(theta[0]);
        std::vector<Point> out(count, Point(static_cast<std::size_t>(n_)));
        for (auto& x : out)
            for (auto& v : x) v = draw(rng);
        return out;
    }

    bool has_sufficient_stat() const noexcept override { return true; }
    Point sufficient_stat(PointView x) const override { return {sum_of(x)}; }
    Params mle_from_stat(PointView s) const override { return {n_ / s[0]}; }

    std::vector<double> mle_crossings(PointView x, std::size_t axis, double level) const override
    {
        if (!(level > 0.0) || !std::isfinite(level)) return {};
        return sum_crossing(x, axis, n_ / level);
    }

    EstimatorMap mle_map() const override
    {
        const int n = n_;
        VectorMap f = [n](PointView x) { return Params{n / sum_of(x)}; };
        EstimatorMap e;
        e.jacobian = JacobianProvider::analytic(1, static_cast<std::size_t>(n), f, [n](PointView x) {
            const double s = sum_of(x);
            return Matrix(Matrix::Constant(1, n, -n / (s * s)));
        });
        e.chart = [n, f](ParamView level) {
            if (!(level[0] > 0.0) || std::isinf(level[0]))
                throw Error(ErrorCode::no_chart, "rate fibers need a finite level > 0");
            return simplex_chart(n, n / level[0], Params(level.begin(), level.end()), f);
        };
        return e;
    }

    TruncatedBox truncation(const Luckiness& v, double) const override
    {
        const auto& support = v.support();
        if (!support || !(support->axes[0].lower > 0.0) || !std::isfinite(support->axes[0].upper))
            throw Error(ErrorCode::divergent,
                        "the MLE-plugin integral of the rate model diverges unless the luckiness "
                        "vanishes outside a compact [a, b] with a > 0");
        const double edge = n_ / support->axes[0].lower;
        return {Box::cube(static_cast<std::size_t>(n_), 0.0, edge), 0.0,
                std::vector<double>(static_cast<std::size_t>(n_), 4.0)};
    }

    std::optional<double> closed_form_pushforward_pdf(ParamView src, ParamView eval) const override
    {
        const double rate = eval[0];
        if (!(rate > 0.0) || std::isinf(rate)) return 0.0;
        // The sample mean is Gamma(N, 1/(N lambda)); lambda-hat is its reciprocal.
        const double mean = 1.0 / rate;
        return std::exp(detail::log_gamma_pdf(n_, 1.0 / (n_ * src[0]), mean)) * mean * mean;
    }

private:
    int n_;
};

// ---------------------------------------------------------------------------

class GaussMean final : public ContinuousModel {
public:
    explicit GaussMean(int n)
        : ContinuousModel(DataSpace::continuous(std::vector<Interval>(static_cast<std::size_t>(n), {-inf, inf})),
                          ParamSpace{1, {{-inf, inf}}}),
          n_(n)
    {
    }

    std::string id() const override { return "gauss-mean"; }
    std::string description() const override { return with_n("unit-variance normal, unknown mean", n_); }

    double density(ParamView theta, PointView x) const override { return std::exp(log_density(theta, x)); }

    double log_density(ParamView theta, PointView x) const override
    {
        double q = 0.0;
        for (double v : x) q += (v - theta[0]) * (v - theta[0]);
        return -0.5 * n_ * std::log(2.0 * kPi) - 0.5 * q;
    }

    MleResult mle(PointView x) const override { return {{sum_of(x) / n_}, false}; }

    std::vector<Point> sample(ParamView theta, std::uint64_t seed, std::size_t count) const override
    {
        require_param(*this, theta);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> draw(theta[0], 1.0);
        std::vector<Point> out(count, Point(static_cast<std::size_t>(n_)));
        for (auto& x : out)
            for (auto& v : x) v = draw(rng);
        return out;
    }

    bool has_sufficient_stat() const noexcept override { return true; }
    Point sufficient_stat(PointView x) const override { return {sum_of(x)}; }
    Params mle_from_stat(PointView s) const override { return {s[0] / n_}; }

    std::vector<double> mle_crossings(PointView x, std::size_t axis, double level) const override
    {
        return sum_crossing(x, axis, n_ * level);
    }

    EstimatorMap mle_map() const override
    {
        const int n = n_;
        VectorMap f = [n](PointView x) { return Params{sum_of(x) / n}; };
        EstimatorMap e;
        e.jacobian = JacobianProvider::analytic(1, static_cast<std::size_t>(n), f, [n](PointView) {
            return Matrix(Matrix::Constant(1, n, 1.0 / n));
        });
        e.chart = [n, f](ParamView level) {
            LevelSetChart chart;
            chart.level.assign(level.begin(), level.end());
            chart.estimator = f;
            const double mu = level[0];
            if (n == 1) {
                chart.codim = 0;
                chart.points = {Point{mu}};
                return chart;
            }
            // mu * 1 + H u with H the orthonormal Helmert basis of the
            // complement of 1; the fiber is truncated to |u_k| <= 12.
            const auto m = static_cast<std::size_t>(n - 1);
            Matrix h = Matrix::Zero(n, static_cast<Eigen::Index>(m));
            for (int k = 1; k < n; ++k) {
                const double scale = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
                for (int i = 0; i < k; ++i) h(i, k - 1) = scale;
                h(k, k - 1) = -k * scale;
            }
            chart.codim = m;
            chart.domain = Box::cube(m, -12.0, 12.0);
            chart.parametrization = JacobianProvider::analytic(
                static_cast<std::size_t>(n), m,
                [h, mu, n](PointView u) {
                    Point x(static_cast<std::size_t>(n), mu);
                    for (int i = 0; i < n; ++i)
                        for (Eigen::Index k = 0; k < h.cols(); ++k) x[i] += h(i, k) * u[k];
                    return x;
                },
                [h](PointView) { return h; });
            return chart;
        };
        return e;
    }

    TruncatedBox truncation(const Luckiness& v, double tail_tol) const override
    {
        const auto& support = v.support();
        if (!support || !support->finite())
            throw Error(ErrorCode::divergent,
                        "the MLE-plugin integral of the Gaussian-mean model diverges unless the "
                        "luckiness vanishes outside a bounded interval");
        const double lo = support->axes[0].lower;
        const double hi = support->axes[0].upper;
        // Total plug-in mass over the slab is (hi - lo) sqrt(N / 2 pi); leaving
        // the box forces some residual |x_i - mean| > c, which a union bound
        // over coordinates controls.
        const double mass = (hi - lo) * std::sqrt(n_ / (2.0 * kPi));
        double c = 1.0;
        while (mass * n_ * std::erfc(c / std::sqrt(2.0)) > tail_tol) c += 0.25;
        return {Box::cube(static_cast<std::size_t>(n_), lo - c, hi + c),
                mass * n_ * std::erfc(c / std::sqrt(2.0)), {}};
    }

    std::optional<double> closed_form_pushforward_pdf(ParamView src, ParamView eval) const override
    {
        const double d = eval[0] - src[0];
        return std::sqrt(n_ / (2.0 * kPi)) * std::exp(-0.5 * n_ * d * d);
    }

private:
    int n_;
};

class AnisoGauss2d final : public ContinuousModel {
public:
    AnisoGauss2d()
        : ContinuousModel(DataSpace::continuous({{-inf, inf}, {-inf, inf}}), ParamSpace{1, {{0.0, inf}}})
    {
    }

    std::string id() const override { return "aniso-gauss-2d"; }
    std::string description() const override
    {
        return "zero-mean bivariate normal, density 2/(pi theta) exp(-(x1^2 + 4 x2^2) / theta)";
    }

    static double quad_form(PointView x) { return x[0] * x[0] + 4.0 * x[1] * x[1]; }

    double density(ParamView theta, PointView x) const override
    {
        const double q = quad_form(x);
        if (theta[0] == 0.0) return q == 0.0 ? inf : 0.0;
        return 2.0 / (kPi * theta[0]) * std::exp(-q / theta[0]);
    }

    double log_density(ParamView theta, PointView x) const override
    {
        const double q = quad_form(x);
        if (theta[0] == 0.0) return q == 0.0 ? inf : -inf;
        return std::log(2.0 / (kPi * theta[0])) - q / theta[0];
    }

    MleResult mle(PointView x) const override
    {
        const double q = quad_form(x);
        return {{q}, q == 0.0};
    }

    std::vector<Point> sample(ParamView theta, std::uint64_t seed, std::size_t count) const override
    {
        require_param(*this, theta);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> first(0.0, std::sqrt(theta[0] / 2.0));
        std::normal_distribution<double> second(0.0, std::sqrt(theta[0] / 8.0));
        std::vector<Point> out(count, Point(2));
        for (auto& x : out) {
            x[0] = first(rng);
            x[1] = second(rng);
        }
        return out;
    }

    bool has_sufficient_stat() const noexcept override { return true; }
    Point sufficient_stat(PointView x) const override { return {quad_form(x)}; }
    Params mle_from_stat(PointView s) const override { return {s[0]}; }

    std::vector<double> mle_crossings(PointView x, std::size_t axis, double level) const override
    {
        const double weight = axis == 0 ? 1.0 : 4.0;
        const double rest = level - (quad_form(x) - weight * x[axis] * x[axis]);
        if (!(rest > 0.0)) return {};
        const double t = std::sqrt(rest / weight);
        return {-t, t};
    }

    EstimatorMap mle_map() const override
    {
        VectorMap f = [](PointView x) { return Params{quad_form(x)}; };
        EstimatorMap e;
        e.jacobian = JacobianProvider::analytic(1, 2, f, [](PointView x) {
            Matrix j(1, 2);
            j << 2.0 * x[0], 8.0 * x[1];
            return j;
        });
        e.chart = [f](ParamView level) {
            if (!(level[0] > 0.0)) throw Error(ErrorCode::no_chart, "ellipse fibers need level > 0");
            const double r = std::sqrt(level[0]);
            LevelSetChart chart;
            chart.codim = 1;
            chart.level.assign(level.begin(), level.end());
            chart.estimator = f;
            chart.domain = Box({{0.0, 2.0 * kPi}});
            chart.parametrization = JacobianProvider::analytic(
                2, 1, [r](PointView t) { return Point{r * std::cos(t[0]), 0.5 * r * std::sin(t[0])}; },
                [r](PointView t) {
                    Matrix j(2, 1);
                    j << -r * std::sin(t[0]), 0.5 * r * std::cos(t[0]);
                    return j;
                });
            return chart;
        };
        return e;
    }

    TruncatedBox truncation(const Luckiness& v, double) const override
    {
        const auto& support = v.support();
        if (!support || !(support->axes[0].lower > 0.0) || !std::isfinite(support->axes[0].upper))
            throw Error(ErrorCode::divergent,
                        "the MLE-plugin integral of the anisotropic Gaussian diverges unless the "
                        "luckiness vanishes outside a compact [a, b] with a > 0");
        const double r = std::sqrt(support->axes[0].upper);
        return {Box({{-r, r}, {-0.5 * r, 0.5 * r}}), 0.0, {}};
    }

    std::optional<double> closed_form_pushforward_pdf(ParamView src, ParamView eval) const override
    {
        if (!(eval[0] > 0.0)) return 0.0;
        return std::exp(-eval[0] / src[0]) / src[0];
    }
};

int read_int(const json& params, const char* key, int minimum)
{
    if (!params.contains(key)) throw Error(ErrorCode::invalid_argument, std::string("missing parameter: ") + key);
    const auto& v = params.at(key);
    if (!v.is_number_integer() || v.get<long long>() < minimum || v.get<long long>() > 1'000'000)
        throw Error(ErrorCode::invalid_argument,
                    std::string("parameter ") + key + " must be an integer >= " + std::to_string(minimum));
    return v.get<int>();
}

json int_schema(int minimum)
{
    return {{"type", "integer"}, {"minimum", minimum}};
}

} // namespace

std::unique_ptr<DiscreteModel> make_bernoulli(int n)
{
    if (n < 1) throw Error(ErrorCode::invalid_argument, "bernoulli needs N >= 1");
    return std::make_unique<Bernoulli>(n);
}

std::unique_ptr<DiscreteModel> make_multinomial(int categories, int n)
{
    if (n < 1 || categories < 2) throw Error(ErrorCode::invalid_argument, "multinomial needs N >= 1 and m >= 2");
    return std::make_unique<Multinomial>(categories, n);
}

std::unique_ptr<ContinuousModel> make_exponential(int n)
{
    if (n < 1) throw Error(ErrorCode::invalid_argument, "exponential needs N >= 1");
    return std::make_unique<Exponential>(n);
}

std::unique_ptr<ContinuousModel> make_exponential_clamped(int n, double lower, double upper)
{
    if (n < 1) throw Error(ErrorCode::invalid_argument, "exponential-clamped needs N >= 1");
    return std::make_unique<ExponentialClamped>(n, lower, upper);
}

std::unique_ptr<ContinuousModel> make_exponential_rate(int n)
{
    if (n < 1) throw Error(ErrorCode::invalid_argument, "exponential-rate needs N >= 1");
    return std::make_unique<ExponentialRate>(n);
}

std::unique_ptr<ContinuousModel> make_gauss_mean(int n)
{
    if (n < 1) throw Error(ErrorCode::invalid_argument, "gauss-mean needs N >= 1");
    return std::make_unique<GaussMean>(n);
}

std::unique_ptr<ContinuousModel> make_aniso_gauss_2d() { return std::make_unique<AnisoGauss2d>(); }

std::unique_ptr<Model> make_model(std::string_view id, const json& params)
{
    if (!params.is_object() && !params.is_null())
        throw Error(ErrorCode::invalid_argument, "model parameters must be a JSON object");
    const json p = params.is_null() ? json::object() : params;
    if (id == "bernoulli") return make_bernoulli(read_int(p, "N", 1));
    if (id == "multinomial") return make_multinomial(read_int(p, "m", 2), read_int(p, "N", 1));
    if (id == "exponential") return make_exponential(read_int(p, "N", 1));
    if (id == "exponential-rate") return make_exponential_rate(read_int(p, "N", 1));
    if (id == "gauss-mean") return make_gauss_mean(read_int(p, "N", 1));
    if (id == "aniso-gauss-2d") return make_aniso_gauss_2d();
    if (id == "exponential-clamped") {
        double lo = 1.0;
        double hi = std::numbers::e;
        if (p.contains("clamp")) {
            const auto& c = p.at("clamp");
            if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
                throw Error(ErrorCode::invalid_argument, "clamp must be [lower, upper]");
            lo = c[0].get<double>();
            hi = c[1].get<double>();
        }
        return make_exponential_clamped(read_int(p, "N", 1), lo, hi);
    }
    throw Error(ErrorCode::unknown_model, "unknown model: " + std::string(id));
}

std::vector<std::string> model_ids()
{
    return {"bernoulli", "multinomial", "exponential", "exponential-clamped",
            "exponential-rate", "gauss-mean", "aniso-gauss-2d"};
}

json model_catalog()
{
    const json n_only = {{"type", "object"},
                         {"properties", {{"N", int_schema(1)}}},
                         {"required", json::array({"N"})}};
    json models = json::array();
    auto add = [&](const char* id, const char* data, const char* description, json schema) {
        models.push_back({{"id", id}, {"data_space", data}, {"description", description}, {"parameters", schema}});
    };
    add("bernoulli", "discrete", "Bernoulli sequence of length N", n_only);
    add("multinomial", "discrete", "categorical sequence of length N over m symbols",
        {{"type", "object"},
         {"properties", {{"N", int_schema(1)}, {"m", int_schema(2)}}},
         {"required", json::array({"N", "m"})}});
    add("exponential", "continuous", "N i.i.d. exponential observations, mean parameter", n_only);
    add("exponential-clamped", "continuous", "exponential model with the mean restricted to [a, b]",
        {{"type", "object"},
         {"properties",
          {{"N", int_schema(1)},
           {"clamp", {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2}, {"maxItems", 2}}}}},
         {"required", json::array({"N"})}});
    add("exponential-rate", "continuous", "N i.i.d. exponential observations, rate parameter", n_only);
    add("gauss-mean", "continuous", "N i.i.d. unit-variance normal observations, unknown mean", n_only);
    add("aniso-gauss-2d", "continuous", "zero-mean bivariate normal with covariance diag(theta/2, theta/8)",
        {{"type", "object"}, {"properties", json::object()}});
    return {{"models", models}};
}

} // namespace nmlc
