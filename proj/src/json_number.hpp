#pragma once

#include "nmlc/error.hpp"

#include <json.hpp>

#include <cmath>

namespace nmlc::detail {

/// Report number: finite values as JSON numbers, infinities as the strings
/// "inf" / "-inf". NaN never reaches a report.
inline nlohmann::json report_number(double v)
{
    if (std::isnan(v)) throw Error(ErrorCode::non_finite_integrand, "NaN reached a report field");
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

} // namespace nmlc::detail
