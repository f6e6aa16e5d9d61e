#include "nmlc/quadrature.hpp"

#include "nmlc/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace nmlc {

std::string_view to_string(QuadMethod m) noexcept
{
    switch (m) {
    case QuadMethod::grid: return "grid";
    case QuadMethod::adaptive_1d: return "adaptive-1d";
    case QuadMethod::qmc: return "qmc";
    }
    return "unknown";
}

QuadMethod parse_quad_method(std::string_view name)
{
    if (name == "grid") return QuadMethod::grid;
    if (name == "adaptive-1d" || name == "adaptive") return QuadMethod::adaptive_1d;
    if (name == "qmc") return QuadMethod::qmc;
    throw Error(ErrorCode::invalid_argument, "unknown quadrature method: " + std::string(name));
}

void QuadratureSpec::validate() const
{
    if (!(abs_tol > 0.0) && !(rel_tol > 0.0))
        throw Error(ErrorCode::invalid_argument, "quadrature tolerance must be positive");
    if (abs_tol < 0.0 || rel_tol < 0.0)
        throw Error(ErrorCode::invalid_argument, "quadrature tolerance must be nonnegative");
    if (method == QuadMethod::grid && resolution < 2)
        throw Error(ErrorCode::invalid_argument, "grid resolution must be >= 2 per axis");
    if (method == QuadMethod::qmc && (replicates < 2 || budget < replicates))
        throw Error(ErrorCode::invalid_argument, "qmc needs at least 2 replicates and one node each");
    if (!(tail_bound >= 0.0) || !std::isfinite(tail_bound))
        throw Error(ErrorCode::invalid_argument, "tail bound must be finite and nonnegative");
    for (double p : grading)
        if (!(p >= 1.0))
            throw Error(ErrorCode::invalid_argument, "qmc grading exponents must be >= 1");
}

KahanSum& KahanSum::operator+=(double x) noexcept
{
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
}

unsigned thread_count()
{
    if (const char* env = std::getenv("NMLC_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void check_finite_box(const Box& box)
{
    if (box.dim() == 0) throw Error(ErrorCode::invalid_argument, "box must have at least one axis");
    for (const auto& a : box.axes)
        if (!a.finite() || !(a.lower <= a.upper))
            throw Error(ErrorCode::invalid_argument, "quadrature box must be finite and ordered");
}

double checked(double v)
{
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_integrand, "integrand returned a non-finite value");
    return v;
}

double midpoint_pass(const Integrand& f, const Box& box, std::size_t n)
{
    const std::size_t dim = box.dim();
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) total *= n;

    std::vector<double> step(dim);
    double cell = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
        step[d] = box.axes[d].width() / static_cast<double>(n);
        cell *= step[d];
    }

    const double sum = detail::parallel_sum(total, [&](std::size_t begin, std::size_t end) {
        KahanSum acc;
        Point x(dim);
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t idx = i;
            for (std::size_t d = 0; d < dim; ++d) {
                const std::size_t k = idx % n;
                idx /= n;
                x[d] = box.axes[d].lower + (static_cast<double>(k) + 0.5) * step[d];
            }
            acc += checked(f(x));
        }
        return acc.value();
    });
    return sum * cell;
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    double magnitude;
    int depth;
    // f at the two outermost nodes on each side, ordered left to right.
    std::array<double, 4> edge;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const Integrand1d& f, double a, double b, int depth)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = checked(f(center));
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    double abs_sum = std::abs(fc) * kWgk[7];
    std::array<double, 4> edge{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double lo = checked(f(center - dx));
        const double hi = checked(f(center + dx));
        kronrod += kWgk[j] * (lo + hi);
        abs_sum += kWgk[j] * (std::abs(lo) + std::abs(hi));
        if (j % 2 == 1) gauss += kWg[j / 2] * (lo + hi);
        if (j == 0) {
            edge[0] = lo;
            edge[3] = hi;
        } else if (j == 1) {
            edge[1] = lo;
            edge[2] = hi;
        }
    }
    return {a,     b, kronrod * half, std::abs((kronrod - gauss) * half), abs_sum * std::abs(half),
            depth, edge};
}

constexpr int kMaxDepth = 60;
constexpr double kEps = std::numeric_limits<double>::epsilon();

} // namespace

IntegralResult grid_integrate(const Integrand& f, const Box& box, const QuadratureSpec& spec)
{
    spec.validate();
    check_finite_box(box);
    if (box.dim() > 3)
        throw Error(ErrorCode::invalid_argument, "grid quadrature supports at most 3 dimensions");
    const std::size_t n = spec.resolution;
    const double nodes = std::pow(static_cast<double>(n), box.dim()) + std::pow(2.0 * n, box.dim());
    if (nodes > 1e8) throw Error(ErrorCode::budget_exceeded, "grid node count exceeds 1e8");

    const double coarse = midpoint_pass(f, box, n);
    const double fine = midpoint_pass(f, box, 2 * n);
    // The h^2 terms cancel; the fine pass's own error bounds what remains.
    const double extrapolated = fine + (fine - coarse) / 3.0;
    return {extrapolated, std::abs(fine - coarse) / 3.0 + spec.tail_bound, static_cast<std::size_t>(nodes)};
}

namespace {

// A jump that falls between the outermost nodes of two adjacent segments, or
// between the outermost node and an end of the interval, is invisible to the
// Kronrod-Gauss estimates. Flags places where the step across such a gap
// dwarfs the variation between the last two nodes and charges the step times
// the gap width to the segment that should be bisected. Returns the summed
// charge. The interval ends themselves are never evaluated; probes at 1/8 and
// 1/64 of the end gap shrink the blind zone there instead.
double charge_gaps(const Integrand1d& f, std::vector<Segment>& segs, const std::vector<double>& breaks,
                   double threshold, std::size_t& nodes)
{
    std::sort(segs.begin(), segs.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
    const double end_gap = 0.5 * (1.0 - kXgk[0]);
    double total = 0.0;
    auto charge = [&](Segment& target, double step, double local, double gap) {
        if (step <= 2.0 * local) return;
        const double c = step * gap;
        total += c;
        if (c > threshold) target.error += c;
    };

    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        Segment& l = segs[i];
        Segment& r = segs[i + 1];
        if (std::binary_search(breaks.begin(), breaks.end(), l.b)) continue;
        const double gap = (l.b - l.a) * end_gap + (r.b - r.a) * end_gap;
        const double local = std::max(std::abs(l.edge[3] - l.edge[2]), std::abs(r.edge[1] - r.edge[0]));
        charge((l.b - l.a) >= (r.b - r.a) ? l : r, std::abs(r.edge[0] - l.edge[3]), local, gap);
    }

    auto probe_end = [&](Segment& seg, bool left) {
        const double gap = (seg.b - seg.a) * end_gap;
        const double sign = left ? 1.0 : -1.0;
        const double end = left ? seg.a : seg.b;
        const double outer_node = left ? seg.edge[0] : seg.edge[3];
        const double next_node = left ? seg.edge[1] : seg.edge[2];
        const double near = checked(f(end + sign * gap / 8.0));
        const double nearest = checked(f(end + sign * gap / 64.0));
        nodes += 2;
        const double local = std::abs(outer_node - next_node);
        const double far_step = std::abs(near - outer_node);
        const double near_step = std::abs(nearest - near);
        // A jump shows up in one of the two steps only; steps of comparable
        // size mean a power-law end singularity, which bisection handles.
        if (far_step > 4.0 * near_step) charge(seg, far_step, local, gap);
        if (near_step > 4.0 * far_step) charge(seg, near_step, local, gap / 8.0);
    };
    probe_end(segs.front(), true);
    probe_end(segs.back(), false);

    std::make_heap(segs.begin(), segs.end());
    return total;
}

} // namespace

IntegralResult adaptive_integrate_1d(const Integrand1d& f, Interval interval, double abs_tol,
                                     double rel_tol, std::size_t initial_segments,
                                     std::span<const double> breaks)
{
    if (!interval.finite() || !(interval.lower <= interval.upper))
        throw Error(ErrorCode::invalid_argument, "adaptive interval must be finite and ordered");
    if (!(abs_tol > 0.0) && !(rel_tol > 0.0))
        throw Error(ErrorCode::invalid_argument, "adaptive tolerance must be positive");
    if (interval.lower == interval.upper) return {0.0, 0.0, 0};

    std::vector<double> cuts;
    for (double b : breaks)
        if (b > interval.lower && b < interval.upper) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const std::size_t parts = std::max<std::size_t>(1, initial_segments);
    std::vector<Segment> heap;
    heap.reserve(2 * parts + 2 * cuts.size() + 64);
    std::size_t nodes = 0;
    double piece_lo = interval.lower;
    for (std::size_t c = 0; c <= cuts.size(); ++c) {
        const double piece_hi = c < cuts.size() ? cuts[c] : interval.upper;
        const double share = (piece_hi - piece_lo) / interval.width();
        const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(share * parts)));
        for (std::size_t i = 0; i < k; ++i) {
            const double a = i == 0 ? piece_lo : piece_lo + (piece_hi - piece_lo) * static_cast<double>(i) / k;
            const double b = i + 1 == k ? piece_hi : piece_lo + (piece_hi - piece_lo) * static_cast<double>(i + 1) / k;
            heap.push_back(gk15(f, a, b, 0));
            nodes += 15;
        }
        piece_lo = piece_hi;
    }
    std::make_heap(heap.begin(), heap.end());
    double total = 0.0;
    double error = 0.0;
    double magnitude = 0.0;
    auto resum = [&] {
        KahanSum t;
        KahanSum e;
        KahanSum m;
        for (const auto& s : heap) {
            t += s.value;
            e += s.error;
            m += s.magnitude;
        }
        total = t.value();
        error = e.value();
        magnitude = m.value();
    };
    resum();

    // Below ~100 ulps of the integrated |f| the Kronrod-Gauss difference is
    // rounding noise and further bisection cannot reduce it.
    auto target = [&] {
        return std::max({abs_tol, rel_tol * std::abs(total), 100.0 * kEps * magnitude});
    };

    double join_charge = 0.0;
    while (true) {
        if (error <= target()) {
            resum();
            if (error <= target()) {
                const double threshold = target() / (4.0 * static_cast<double>(heap.size()));
                join_charge = charge_gaps(f, heap, cuts, threshold, nodes);
                const double before = error;
                resum();
                if (error == before) break;
            }
            continue;
        }
        std::pop_heap(heap.begin(), heap.end());
        const Segment worst = heap.back();
        heap.pop_back();
        if (worst.depth >= kMaxDepth)
            throw Error(ErrorCode::max_depth, "adaptive quadrature exceeded 60 bisection levels");
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = gk15(f, worst.a, mid, worst.depth + 1);
        const Segment right = gk15(f, mid, worst.b, worst.depth + 1);
        nodes += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
        if (heap.size() % 1024 == 0) resum();
    }
    return {total, error + join_charge, nodes};
}

namespace {

IntegralResult iterated_axis(const Integrand& f, const Box& box, std::size_t axis, Point& x,
                             double abs_tol, double rel_tol, std::size_t initial_segments, const AxisBreaks& breaks)
{
    const Interval iv = box.axes[axis];
    const std::vector<double> cuts = breaks ? breaks(x, axis) : std::vector<double>{};
    if (axis + 1 == box.dim()) {
        return adaptive_integrate_1d(
            [&](double t) {
                x[axis] = t;
                return f(x);
            },
            iv, abs_tol, rel_tol, initial_segments, cuts);
    }
    // The inner tolerance is tightened so its accumulated error stays below
    // the outer target.
    const double inner_abs = abs_tol / std::max(iv.width(), 1.0) * 0.1;
    const double inner_rel = rel_tol * 0.1;
    double worst_inner = 0.0;
    std::size_t nodes = 0;
    IntegralResult outer = adaptive_integrate_1d(
        [&](double t) {
            x[axis] = t;
            const IntegralResult inner =
                iterated_axis(f, box, axis + 1, x, inner_abs, inner_rel, initial_segments, breaks);
            worst_inner = std::max(worst_inner, inner.error_estimate);
            nodes += inner.nodes_used;
            return inner.value;
        },
        iv, abs_tol, rel_tol, initial_segments, cuts);
    outer.error_estimate += worst_inner * iv.width();
    outer.nodes_used = nodes;
    return outer;
}

} // namespace

IntegralResult iterated_integrate(const Integrand& f, const Box& box, double abs_tol, double rel_tol,
                                  std::size_t initial_segments, const AxisBreaks& breaks)
{
    check_finite_box(box);
    if (box.dim() > 3)
        throw Error(ErrorCode::invalid_argument, "iterated quadrature supports at most 3 dimensions");
    Point x(box.dim());
    return iterated_axis(f, box, 0, x, abs_tol, rel_tol, initial_segments, breaks);
}

IntegralResult qmc_integrate(const Integrand& f, const Box& box, const QuadratureSpec& spec)
{
    spec.validate();
    check_finite_box(box);
    const std::size_t dim = box.dim();
    if (!spec.grading.empty() && spec.grading.size() != dim)
        throw Error(ErrorCode::invalid_argument, "qmc grading must list one exponent per axis");

    // Generalized golden ratio: the unique positive root of x^(d+1) = x + 1.
    double phi = 2.0;
    for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dim + 1));
    std::vector<double> alpha(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const double a = std::pow(1.0 / phi, static_cast<double>(d + 1));
        alpha[d] = a - std::floor(a);
    }
    std::vector<double> grading = spec.grading;
    if (grading.empty()) grading.assign(dim, 1.0);

    const std::size_t reps = spec.replicates;
    const std::size_t per_rep = spec.budget / reps;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<double> estimates(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        std::vector<double> shift(dim);
        for (auto& s : shift) s = unif(rng);

        const double sum = detail::parallel_sum(per_rep, [&](std::size_t begin, std::size_t end) {
            KahanSum acc;
            Point x(dim);
            for (std::size_t i = begin; i < end; ++i) {
                double weight = 1.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    double u = static_cast<double>(i + 1) * alpha[d] + shift[d];
                    u -= std::floor(u);
                    const double width = box.axes[d].width();
                    const double p = grading[d];
                    if (p == 1.0) {
                        x[d] = box.axes[d].lower + width * u;
                        weight *= width;
                    } else {
                        x[d] = box.axes[d].lower + width * std::pow(u, p);
                        weight *= width * p * std::pow(u, p - 1.0);
                    }
                }
                if (weight == 0.0) continue;
                acc += checked(f(x)) * weight;
            }
            return acc.value();
        });
        estimates[r] = sum / static_cast<double>(per_rep);
    }

    KahanSum mean_acc;
    for (double e : estimates) mean_acc += e;
    const double mean = mean_acc.value() / static_cast<double>(reps);
    KahanSum var_acc;
    for (double e : estimates) var_acc += (e - mean) * (e - mean);
    const double var = var_acc.value() / static_cast<double>(reps - 1);
    const double stderr_ = std::sqrt(var / static_cast<double>(reps));
    return {mean, stderr_ + spec.tail_bound, per_rep * reps};
}

IntegralResult integrate(const Integrand& f, const Box& box, const QuadratureSpec& spec)
{
    spec.validate();
    IntegralResult r;
    switch (spec.method) {
    case QuadMethod::grid: return grid_integrate(f, box, spec);
    case QuadMethod::qmc: return qmc_integrate(f, box, spec);
    case QuadMethod::adaptive_1d:
        r = iterated_integrate(f, box, spec.abs_tol, spec.rel_tol, spec.initial_segments);
        r.error_estimate += spec.tail_bound;
        return r;
    }
    return r;
}

} // namespace nmlc
