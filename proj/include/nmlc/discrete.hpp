#pragma once

#include "nmlc/luckiness.hpp"
#include "nmlc/model.hpp"

#include <cstddef>
#include <map>

namespace nmlc {

inline constexpr std::size_t kEnumerationBudget = 10'000'000;

/// Sum over every data point x of PMF(mle(x), x) * v(mle(x)).
/// Throws enumeration_budget_exceeded above `budget` points.
double comp_bruteforce_discrete(const DiscreteModel& model, const Luckiness& v,
                                std::size_t budget = kEnumerationBudget);

/// Distribution of estimator(X) for X ~ mu_source, keyed by exact estimate.
std::map<RationalParams, double> pushforward_distribution(const DiscreteModel& model, const RationalEstimator& estimator,
                                                          ParamView source, std::size_t budget = kEnumerationBudget);

/// Mass that estimator(X), X ~ mu_source, puts on `target` (0 off the image).
double pushforward_pmf(const DiscreteModel& model, const RationalEstimator& estimator, ParamView source,
                       const RationalParams& target, std::size_t budget = kEnumerationBudget);

/// Sum over estimates t in the estimator image of P[t_# mu_t](t) * v(t).
/// Holds for any estimator; with the MLE it equals the brute-force sum.
double comp_via_pushforward(const DiscreteModel& model, const RationalEstimator& estimator, const Luckiness& v,
                            std::size_t budget = kEnumerationBudget);
double comp_via_pushforward(const DiscreteModel& model, const Luckiness& v, std::size_t budget = kEnumerationBudget);

/// Sum over statistic values s of P[s_# mu_t](s) * v(t) with t = mle_from_stat(s).
/// Uses the model's closed-form statistic PMF when it has one.
/// Throws no_sufficient_stat when the model registers none.
double comp_via_sufficient_stat(const DiscreteModel& model, const Luckiness& v,
                                std::size_t budget = kEnumerationBudget);

struct DiscreteCompResult {
    double comp = 0.0;
    double brute = 0.0;
    double pushforward = 0.0;
    double sufficient_stat = 0.0;
    double max_discrepancy = 0.0;
};

/// All three routes; `comp` is the brute-force value.
DiscreteCompResult comp_discrete_all(const DiscreteModel& model, const Luckiness& v,
                                     std::size_t budget = kEnumerationBudget);

} // namespace nmlc
