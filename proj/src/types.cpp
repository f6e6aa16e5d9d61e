#include "nmlc/types.hpp"

#include "nmlc/error.hpp"

#include <cmath>

namespace nmlc {

bool Interval::finite() const noexcept { return std::isfinite(lower) && std::isfinite(upper); }

Box Box::cube(std::size_t dim, double lower, double upper)
{
    return Box(std::vector<Interval>(dim, Interval{lower, upper}));
}

double Box::volume() const noexcept
{
    double v = 1.0;
    for (const auto& a : axes) v *= a.width();
    return v;
}

bool Box::finite() const noexcept
{
    for (const auto& a : axes)
        if (!a.finite()) return false;
    return true;
}

bool Box::contains(PointView x) const noexcept
{
    if (x.size() != axes.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!axes[i].contains(x[i])) return false;
    return true;
}

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::out_of_domain: return "out-of-domain";
    case ErrorCode::degenerate_mle: return "degenerate-MLE";
    case ErrorCode::non_differentiable_point: return "non-differentiable-point";
    case ErrorCode::chart_inconsistent: return "chart-inconsistent";
    case ErrorCode::non_finite_integrand: return "non-finite-integrand";
    case ErrorCode::jacobian_degenerate: return "jacobian-degenerate";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::max_depth: return "max-depth";
    case ErrorCode::enumeration_budget_exceeded: return "enumeration-budget-exceeded";
    case ErrorCode::no_sufficient_stat: return "no-sufficient-stat";
    case ErrorCode::no_chart: return "no-chart";
    case ErrorCode::no_closed_form: return "no-closed-form";
    case ErrorCode::divergent: return "divergent";
    case ErrorCode::infinite_comp: return "infinite-comp";
    case ErrorCode::unknown_model: return "unknown-model";
    case ErrorCode::invalid_argument: return "invalid-argument";
    }
    return "unknown";
}

} // namespace nmlc
