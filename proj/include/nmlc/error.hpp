#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nmlc {

enum class ErrorCode {
    out_of_domain,
    degenerate_mle,
    non_differentiable_point,
    chart_inconsistent,
    non_finite_integrand,
    jacobian_degenerate,
    budget_exceeded,
    max_depth,
    enumeration_budget_exceeded,
    no_sufficient_stat,
    no_chart,
    no_closed_form,
    divergent,
    infinite_comp,
    unknown_model,
    invalid_argument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above; the
/// CLI maps them to exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace nmlc
