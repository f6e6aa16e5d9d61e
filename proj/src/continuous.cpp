#include "nmlc/continuous.hpp"

#include "nmlc/error.hpp"
#include "nmlc/geometry.hpp"
#include "nmlc/jacobian.hpp"
#include "json_number.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nmlc {

namespace {

using nlohmann::json;

// Local power-law exponents closer than this to 1 count as non-integrable.
constexpr double kExponentSlack = 1e-3;

void require_scalar_param(const ContinuousModel& model)
{
    if (model.param_space().dim != 1)
        throw Error(ErrorCode::invalid_argument, model.id() + ": only one-dimensional parameters are supported here");
}

std::string format(double v)
{
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

// Domain of the g-function integral: parameter bounds cut to the luckiness support.
Interval integration_domain(const ContinuousModel& model, const Luckiness& v)
{
    Interval dom = model.param_space().bounds[0];
    if (const auto& s = v.support()) {
        dom.lower = std::max(dom.lower, s->axes[0].lower);
        dom.upper = std::min(dom.upper, s->axes[0].upper);
    }
    return dom;
}

double interior_anchor(Interval dom)
{
    const bool lo = std::isfinite(dom.lower);
    const bool hi = std::isfinite(dom.upper);
    if (lo && hi) return 0.5 * (dom.lower + dom.upper);
    if (lo) return dom.lower + 1.0;
    if (hi) return dom.upper - 1.0;
    return 0.0;
}

struct EndScan {
    bool divergent = false;
    std::string why;
    /// Finite replacement for an infinite end.
    double cut = 0.0;
    double tail = 0.0;
};

// Exponent a with f ~ |t|^(-a) between two points a factor 2 apart in
// distance from the anchor (f(near) > 0).
double decay_exponent(double near, double far)
{
    if (far <= 0.0) return inf;
    return std::log2(near / far);
}

// Behaviour of f at a finite end `end`: integrable iff f grows slower than
// 1/distance.
EndScan scan_finite_end(const std::function<double(double)>& f, double end, double anchor)
{
    EndScan r;
    r.cut = end;
    const double d = (anchor - end) * std::ldexp(1.0, -50);
    const double outer = f(end + d);
    const double inner = f(end + d / 2.0);
    if (outer > 0.0 && inner > 0.0) {
        const double growth = std::log2(inner / outer);
        if (growth >= 1.0 - kExponentSlack) {
            r.divergent = true;
            r.why = "integrand grows like |theta - " + format(end) + "|^(-" + format(growth) + ") at the domain end";
        }
    }
    return r;
}

// Behaviour of f towards +-infinity (direction = +1 or -1). Integrable iff f
// decays faster than 1/|t|; the cut is placed where the estimated tail mass
// drops below `tail_tol`.
EndScan scan_infinite_end(const std::function<double(double)>& f, double anchor, double direction, double tail_tol)
{
    EndScan r;
    auto at = [&](int k) { return anchor + direction * std::ldexp(1.0, k); };
    const double far = f(at(60));
    if (far > 0.0) {
        const double a = decay_exponent(far, f(at(61)));
        if (a <= 1.0 + kExponentSlack) {
            r.divergent = true;
            r.why = "integrand decays like |theta|^(-" + format(a) + ") at infinity";
            return r;
        }
    }
    for (int k = 0; k <= 60; ++k) {
        const double t = at(k);
        const double ft = f(t);
        const double fnext = f(at(k + 1));
        if (ft == 0.0 && fnext == 0.0) {
            r.cut = t;
            return r;
        }
        const double a = ft > 0.0 ? decay_exponent(ft, fnext) : inf;
        if (a > 1.0 + kExponentSlack) {
            const double tail = std::abs(t - anchor) * ft / (a - 1.0);
            if (tail < tail_tol) {
                r.cut = t;
                r.tail = tail;
                return r;
            }
        }
    }
    r.cut = at(60);
    r.tail = std::abs(r.cut - anchor) * far;
    return r;
}

CompReport divergent_report(const Model& model, const Luckiness& v, std::string method, std::string why)
{
    CompReport r;
    r.model = model.id();
    r.luckiness = v.id();
    r.method = std::move(method);
    r.value = inf;
    r.divergent = true;
    r.diagnostic = std::move(why);
    return r;
}

} // namespace

std::string_view to_string(PdfSourceKind kind) noexcept
{
    switch (kind) {
    case PdfSourceKind::closed_form: return "closed-form";
    case PdfSourceKind::coarea_chart: return "coarea-chart";
    case PdfSourceKind::mc_histogram: return "mc-histogram";
    }
    return "closed-form";
}

PdfSourceKind parse_pdf_source(std::string_view name)
{
    if (name == "closed-form") return PdfSourceKind::closed_form;
    if (name == "coarea-chart") return PdfSourceKind::coarea_chart;
    if (name == "mc-histogram") return PdfSourceKind::mc_histogram;
    throw Error(ErrorCode::invalid_argument, "unknown estimator density source: " + std::string(name));
}

// ---------------------------------------------------------------------------

HistogramOracle::HistogramOracle(const ContinuousModel& model, ParamView theta_source, std::size_t samples,
                                 std::uint64_t seed)
{
    require_scalar_param(model);
    if (samples < 2) throw Error(ErrorCode::invalid_argument, "histogram oracle needs at least two samples");
    const auto data = model.sample(theta_source, seed, samples);
    estimates_.reserve(samples);
    KahanSum sum;
    for (const auto& x : data) {
        const double t = model.mle(x).theta[0];
        estimates_.push_back(t);
        sum += t;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum.value() / n;
    KahanSum sq;
    for (double t : estimates_) sq += (t - mean) * (t - mean);
    const double sigma = std::sqrt(sq.value() / (n - 1.0));
    width_ = 3.5 * sigma * std::cbrt(1.0 / n);
    if (!(width_ > 0.0)) throw Error(ErrorCode::degenerate_mle, "estimator sample has zero spread");
    std::sort(estimates_.begin(), estimates_.end());
}

double HistogramOracle::operator()(double theta_eval) const
{
    const auto lo = std::lower_bound(estimates_.begin(), estimates_.end(), theta_eval - 0.5 * width_);
    const auto hi = std::lower_bound(estimates_.begin(), estimates_.end(), theta_eval + 0.5 * width_);
    return static_cast<double>(hi - lo) / (static_cast<double>(estimates_.size()) * width_);
}

double estimator_pdf(const ContinuousModel& model, ParamView theta_source, ParamView theta_eval,
                     const EstimatorPdfSource& source)
{
    switch (source.kind) {
    case PdfSourceKind::closed_form: {
        const auto p = model.closed_form_pushforward_pdf(theta_source, theta_eval);
        if (!p) throw Error(ErrorCode::no_closed_form, model.id() + " has no closed-form estimator density");
        return *p;
    }
    case PdfSourceKind::coarea_chart: {
        const EstimatorMap f = model.mle_map();
        if (!f.has_chart()) throw Error(ErrorCode::no_chart, model.id() + " supplies no fiber charts");
        const LevelSetChart chart = f.chart(theta_eval);
        const Params src(theta_source.begin(), theta_source.end());
        const Integrand g = [&](PointView x) {
            const double p = model.density(src, x);
            if (p == 0.0) return 0.0;
            return p * guarded_reciprocal(nonsquare_jacobian_det(jacobian_matrix(f.jacobian, x)));
        };
        return hausdorff_integral(chart, g, source.fiber_quad).value;
    }
    case PdfSourceKind::mc_histogram:
        return HistogramOracle(model, theta_source, source.samples, source.seed)(theta_eval[0]);
    }
    throw Error(ErrorCode::invalid_argument, "unknown estimator density source");
}

GFunction diagonal(const ContinuousModel& model, const EstimatorPdfSource& source)
{
    require_scalar_param(model);
    return [&model, source](double theta) {
        const Params p{theta};
        return estimator_pdf(model, p, p, source);
    };
}

double CompReport::log_value() const { return divergent ? inf : std::log(value); }

// ---------------------------------------------------------------------------

CompReport lmc_gfunction(const ContinuousModel& model, const Luckiness& v, const EstimatorPdfSource& source,
                         const QuadratureSpec& outer_quad)
{
    require_scalar_param(model);
    if (source.kind == PdfSourceKind::mc_histogram)
        throw Error(ErrorCode::invalid_argument, "the histogram density is a cross-check only and cannot feed Comp");
    const std::string method = "gfunction:" + std::string(to_string(source.kind));

    const GFunction g = diagonal(model, source);
    const std::function<double(double)> weighted = [&](double t) {
        const double w = v(Params{t});
        return w == 0.0 ? 0.0 : w * g(t);
    };

    CompReport r;
    r.model = model.id();
    r.luckiness = v.id();
    r.method = method;

    const Interval dom = integration_domain(model, v);
    if (dom.upper > dom.lower) {
        const double anchor = interior_anchor(dom);
        Interval range = dom;
        double tail = 0.0;
        const EndScan lo = std::isfinite(dom.lower) ? scan_finite_end(weighted, dom.lower, anchor)
                                                    : scan_infinite_end(weighted, anchor, -1.0, outer_quad.abs_tol);
        if (lo.divergent) return divergent_report(model, v, method, "g-function not integrable: " + lo.why);
        const EndScan hi = std::isfinite(dom.upper) ? scan_finite_end(weighted, dom.upper, anchor)
                                                    : scan_infinite_end(weighted, anchor, 1.0, outer_quad.abs_tol);
        if (hi.divergent) return divergent_report(model, v, method, "g-function not integrable: " + hi.why);
        range.lower = lo.cut;
        range.upper = hi.cut;
        tail = lo.tail + hi.tail;

        const IntegralResult res = adaptive_integrate_1d(weighted, range, outer_quad.abs_tol, outer_quad.rel_tol,
                                                         outer_quad.initial_segments);
        r.value = res.value;
        r.error_estimate = res.error_estimate + tail;
        r.nodes_used = res.nodes_used;
    }

    // Point masses of the estimator distribution, each under its own source.
    const Params probe{interior_anchor(model.param_space().bounds[0])};
    for (const auto& atom : model.estimator_atoms(probe)) {
        const double w = v(atom.location);
        if (w == 0.0) continue;
        for (const auto& own : model.estimator_atoms(atom.location))
            if (own.location == atom.location) r.value += w * own.mass;
    }
    return r;
}

QuadratureSpec default_data_quadrature(const ContinuousModel& model)
{
    QuadratureSpec q;
    const std::size_t dim = model.data_space().dim;
    if (dim <= 3) {
        q.method = QuadMethod::adaptive_1d;
        q.abs_tol = 1e-11;
        q.rel_tol = 1e-10;
    } else {
        q.method = QuadMethod::qmc;
        q.budget = std::size_t{1} << 21;
        q.replicates = 16;
    }
    return q;
}

CompReport comp_bruteforce_continuous(const ContinuousModel& model, const Luckiness& v, const QuadratureSpec& data_quad,
                                      const std::optional<Box>& box, double tail_tol)
{
    const std::string method = "brute:" + std::string(to_string(data_quad.method));
    TruncatedBox tb;
    try {
        tb = model.truncation(v, tail_tol);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::divergent) throw;
        return divergent_report(model, v, method, e.what());
    }
    if (box) {
        if (box->dim() != model.data_space().dim)
            throw Error(ErrorCode::invalid_argument, "integration box dimension differs from the data dimension");
        tb.box = *box;
    }

    const Integrand h = [&](PointView x) {
        const MleResult m = model.mle(x);
        if (m.boundary) return 0.0;
        const double w = v(m.theta);
        return w == 0.0 ? 0.0 : w * model.density(m.theta, x);
    };

    QuadratureSpec q = data_quad;
    q.tail_bound = tb.tail_bound;
    if (q.grading.empty()) q.grading = tb.qmc_grading;
    IntegralResult res;
    if (q.method == QuadMethod::adaptive_1d) {
        // The integrand jumps where the MLE crosses an end of the luckiness
        // support and kinks where it reaches a parameter bound. On an outer
        // axis the inner integral bends where such a crossing meets a face of
        // the box or the origin, so those placements of the later coordinates
        // are tried too.
        std::vector<double> levels;
        if (model.param_space().dim == 1) {
            auto add = [&](double t) {
                if (std::isfinite(t)) levels.push_back(t);
            };
            if (const auto& support = v.support()) {
                add(support->axes[0].lower);
                add(support->axes[0].upper);
            }
            add(model.param_space().bounds[0].lower);
            add(model.param_space().bounds[0].upper);
        }
        const std::size_t dim = tb.box.dim();
        std::vector<std::vector<double>> anchors(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const Interval& iv = tb.box.axes[d];
            anchors[d] = {iv.lower, iv.upper};
            if (iv.lower < 0.0 && iv.upper > 0.0) anchors[d].push_back(0.0);
        }
        const AxisBreaks breaks = [&](PointView prefix, std::size_t axis) {
            std::vector<double> out;
            Point x(prefix.begin(), prefix.end());
            std::function<void(std::size_t)> place = [&](std::size_t d) {
                if (d == dim) {
                    for (double level : levels)
                        for (double t : model.mle_crossings(x, axis, level)) out.push_back(t);
                    return;
                }
                for (double a : anchors[d]) {
                    x[d] = a;
                    place(d + 1);
                }
            };
            place(axis + 1);
            return out;
        };
        res = iterated_integrate(h, tb.box, q.abs_tol, q.rel_tol, q.initial_segments, breaks);
        res.error_estimate += q.tail_bound;
    } else {
        res = integrate(h, tb.box, q);
    }

    CompReport r;
    r.model = model.id();
    r.luckiness = v.id();
    r.method = method;
    r.value = res.value;
    r.error_estimate = res.error_estimate;
    r.nodes_used = res.nodes_used;
    return r;
}

// ---------------------------------------------------------------------------

NmlResult nml_code_length(const Model& model, PointView x, const CompReport& comp, double base)
{
    if (comp.divergent || !std::isfinite(comp.value))
        throw Error(ErrorCode::infinite_comp, "model complexity is infinite; the NML code length is undefined");
    if (!(comp.value > 0.0)) throw Error(ErrorCode::invalid_argument, "model complexity must be positive");
    if (!(base > 1.0)) throw Error(ErrorCode::invalid_argument, "log base must exceed 1");
    NmlResult r;
    r.l_ml = log_max_likelihood(model, x, base);
    r.log_comp = std::log(comp.value) / std::log(base);
    r.l_nml = r.l_ml + r.log_comp;
    r.base = base;
    r.luckiness = comp.luckiness;
    return r;
}

SelectionResult select_model(const std::vector<SelectionCandidate>& candidates, PointView x, double base)
{
    if (candidates.size() < 2) throw Error(ErrorCode::invalid_argument, "model selection needs at least two candidates");
    SelectionResult out;
    for (const auto& c : candidates) {
        if (!c.model) throw Error(ErrorCode::invalid_argument, "selection candidate without a model");
        out.code_lengths.push_back(nml_code_length(*c.model, x, c.comp, base));
    }
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double li = out.code_lengths[i].l_nml;
        const double lb = out.code_lengths[out.index].l_nml;
        const double scale = std::max({1.0, std::abs(li), std::abs(lb)});
        if (li < lb - 1e-12 * scale) {
            out.index = i;
        } else if (std::abs(li - lb) <= 1e-12 * scale && candidates[i].comp.value < candidates[out.index].comp.value) {
            out.index = i;
        }
    }
    return out;
}

double exponential_lmc_closed_form(int n, double theta_min, double theta_max)
{
    if (n < 1) throw Error(ErrorCode::invalid_argument, "N must be at least 1");
    if (!(theta_min > 0.0) || !(theta_min <= theta_max) || !std::isfinite(theta_max))
        throw Error(ErrorCode::invalid_argument, "need 0 < theta_min <= theta_max < inf");
    const double log_coef = n * std::log(static_cast<double>(n)) - std::lgamma(static_cast<double>(n)) - n;
    return std::exp(log_coef) * (std::log(theta_max) - std::log(theta_min));
}

json to_json(const CompReport& r)
{
    json j = {{"model", r.model},
              {"luckiness", r.luckiness},
              {"method", r.method},
              {"value", detail::report_number(r.value)},
              {"log_value", detail::report_number(r.log_value())},
              {"error_estimate", detail::report_number(r.error_estimate)},
              {"nodes_used", r.nodes_used},
              {"divergent", r.divergent}};
    if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
    if (r.cross_check_residual) j["cross_check_residual"] = detail::report_number(*r.cross_check_residual);
    return j;
}

json to_json(const NmlResult& r)
{
    return {{"l_ml", detail::report_number(r.l_ml)},
            {"log_comp", detail::report_number(r.log_comp)},
            {"l_nml", detail::report_number(r.l_nml)},
            {"base", r.base},
            {"luckiness", r.luckiness}};
}

} // namespace nmlc
