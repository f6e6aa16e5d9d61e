#pragma once

#include "nmlc/estimator.hpp"
#include "nmlc/quadrature.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nmlc {

/// Throws chart_inconsistent unless the estimator maps `samples` chart
/// points back to the chart level within 1e-9 (scaled by max(1, |level|)).
void check_chart(const LevelSetChart& chart, std::size_t samples = 1000);

/// Integral of g over the fiber against the (D-K)-dimensional Hausdorff
/// measure: a sum over the points for codimension 0, otherwise
/// int_U g(gamma(u)) sqrt(det(dgamma^T dgamma)) du.
IntegralResult hausdorff_integral(const LevelSetChart& chart, const Integrand& g, const QuadratureSpec& quad);

/// Left side of the coarea identity: the Lebesgue integral of h over a box.
IntegralResult coarea_lhs(const Integrand& h, const Box& box, const QuadratureSpec& quad);

/// Right side: the iterated integral over parameter levels of the fiber
/// integrals of h / Jf (with 1/0 read as 0). Levels range over `params`;
/// one dimension uses adaptive quadrature, more use a fixed grid.
/// Throws jacobian_degenerate when Jf vanishes on more than 0.01% of 10^4
/// sampled fiber points.
IntegralResult coarea_rhs(const EstimatorMap& f, const Integrand& h, const ChartFactory& charts,
                          const Box& params, const QuadratureSpec& quad);

/// The decomposition that fails for continuous data: the inner integral is
/// taken against D-dimensional Lebesgue measure of the fiber (a null set),
/// estimated on a grid over `data_box`. Always collapses to zero.
IntegralResult naive_decomposition_rhs(const EstimatorMap& f, const Integrand& h, const Box& data_box,
                                       const Box& params, const QuadratureSpec& quad);

enum class CoareaCaseKind { coarea, naive_decomposition };

struct CoareaReport {
    std::string case_id;
    CoareaCaseKind kind = CoareaCaseKind::coarea;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    nlohmann::json metadata;
};

std::vector<std::string> coarea_case_ids();

/// Runs a registered case. Coarea cases pass when rel_residual < tolerance;
/// naive-decomposition cases pass when the naive right side is zero while
/// the left side exceeds 0.9. Throws invalid_argument for unknown ids.
CoareaReport verify_coarea(std::string_view case_id);

nlohmann::json to_json(const CoareaReport& report);

} // namespace nmlc
