#pragma once

#include "nmlc/luckiness.hpp"
#include "nmlc/model.hpp"
#include "nmlc/quadrature.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmlc {

enum class PdfSourceKind { closed_form, coarea_chart, mc_histogram };

std::string_view to_string(PdfSourceKind kind) noexcept;
PdfSourceKind parse_pdf_source(std::string_view name);

/// How estimator densities are obtained. The histogram is an oracle only:
/// lmc_gfunction refuses it.
struct EstimatorPdfSource {
    PdfSourceKind kind = PdfSourceKind::closed_form;
    /// Fiber quadrature for the chart source.
    QuadratureSpec fiber_quad = [] {
        QuadratureSpec q;
        q.abs_tol = 1e-13;
        q.rel_tol = 1e-11;
        return q;
    }();
    /// Histogram oracle: sample count and sampler seed. The bin is centred on
    /// the evaluation point with width 3.5 sigma n^(-1/3).
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 1;
};

/// Density at theta_eval of the MLE under data drawn from theta_source.
/// Throws no_closed_form or no_chart when the requested source is missing.
double estimator_pdf(const ContinuousModel& model, ParamView theta_source, ParamView theta_eval,
                     const EstimatorPdfSource& source);

/// Histogram estimate of the MLE density from one sample set, reusable
/// across evaluation points (one-dimensional parameters).
class HistogramOracle {
public:
    HistogramOracle(const ContinuousModel& model, ParamView theta_source, std::size_t samples, std::uint64_t seed);

    double bin_width() const noexcept { return width_; }
    double operator()(double theta_eval) const;

private:
    std::vector<double> estimates_;
    double width_ = 0.0;
};

/// theta -> density at theta of the MLE under data drawn from theta. The
/// source index follows the evaluation point.
using GFunction = std::function<double(double)>;
GFunction diagonal(const ContinuousModel& model, const EstimatorPdfSource& source);

struct CompReport {
    std::string model;
    std::string luckiness;
    std::string method;
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t nodes_used = 0;
    bool divergent = false;
    std::string diagnostic;
    /// Relative difference to an independent route, when one was run.
    std::optional<double> cross_check_residual;

    /// Natural log of value (+inf when divergent).
    double log_value() const;
};

/// Integral over parameter space of the g-function times the luckiness,
/// plus the luckiness-weighted masses of any estimator atoms. A pre-scan of
/// the behaviour at the ends of the domain reports non-integrable cases as
/// divergent with value +inf.
CompReport lmc_gfunction(const ContinuousModel& model, const Luckiness& v, const EstimatorPdfSource& source,
                         const QuadratureSpec& outer_quad);

/// Default data-space quadrature: nested adaptive up to three dimensions,
/// graded QMC beyond.
QuadratureSpec default_data_quadrature(const ContinuousModel& model);

/// Integral over data space of the MLE-plugin likelihood times the luckiness
/// of the estimate, over the model's truncation box (or `box` when given).
/// Divergent plug-in integrals are reported with value +inf.
CompReport comp_bruteforce_continuous(const ContinuousModel& model, const Luckiness& v, const QuadratureSpec& data_quad,
                                      const std::optional<Box>& box = std::nullopt, double tail_tol = 1e-10);

struct NmlResult {
    double l_ml = 0.0;
    double log_comp = 0.0;
    double l_nml = 0.0;
    double base = 2.0;
    std::string luckiness;
};

/// l_NML = l_ML + log_b Comp. Throws infinite_comp for a divergent report
/// and invalid_argument for a non-positive value.
NmlResult nml_code_length(const Model& model, PointView x, const CompReport& comp, double base);

struct SelectionCandidate {
    const Model* model = nullptr;
    CompReport comp;
};

struct SelectionResult {
    std::size_t index = 0;
    std::vector<NmlResult> code_lengths;
};

/// Index minimizing l_NML(x); ties go to the smaller Comp, then the lower
/// index. Needs at least two candidates.
SelectionResult select_model(const std::vector<SelectionCandidate>& candidates, PointView x, double base);

/// N^N / Gamma(N) e^(-N) (log theta_max - log theta_min).
double exponential_lmc_closed_form(int n, double theta_min, double theta_max);

nlohmann::json to_json(const CompReport& report);
nlohmann::json to_json(const NmlResult& result);

} // namespace nmlc
