#include "nmlc/discrete.hpp"

#include "nmlc/error.hpp"
#include "nmlc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace nmlc {

namespace {

void check_budget(const DiscreteModel& model, std::size_t budget)
{
    const std::size_t n = model.data_space().cardinality();
    if (n > budget)
        throw Error(ErrorCode::enumeration_budget_exceeded,
                    "data space of " + model.id() + " has more than " + std::to_string(budget) + " points");
}

double total(const std::map<RationalParams, KahanSum>& parts)
{
    KahanSum sum;
    for (const auto& [key, part] : parts) sum += part.value();
    return sum.value();
}

} // namespace

double comp_bruteforce_discrete(const DiscreteModel& model, const Luckiness& v, std::size_t budget)
{
    check_budget(model, budget);
    KahanSum sum;
    model.data_space().for_each_point([&](PointView x) {
        const Params theta = model.mle(x).theta;
        const double w = v(theta);
        if (w != 0.0) sum += w * model.density(theta, x);
    });
    return sum.value();
}

std::map<RationalParams, double> pushforward_distribution(const DiscreteModel& model, const RationalEstimator& estimator,
                                                          ParamView source, std::size_t budget)
{
    check_budget(model, budget);
    std::map<RationalParams, KahanSum> parts;
    model.data_space().for_each_point([&](PointView x) { parts[estimator(x)] += model.density(source, x); });
    std::map<RationalParams, double> out;
    for (const auto& [key, part] : parts) out.emplace(key, part.value());
    return out;
}

double pushforward_pmf(const DiscreteModel& model, const RationalEstimator& estimator, ParamView source,
                       const RationalParams& target, std::size_t budget)
{
    check_budget(model, budget);
    KahanSum sum;
    model.data_space().for_each_point([&](PointView x) {
        if (estimator(x) == target) sum += model.density(source, x);
    });
    return sum.value();
}

double comp_via_pushforward(const DiscreteModel& model, const RationalEstimator& estimator, const Luckiness& v,
                            std::size_t budget)
{
    check_budget(model, budget);
    // Each fiber is summed under its own estimate, which its key fixes, so a
    // single pass accumulates P[t_# mu_t](t) for every t in the image.
    std::map<RationalParams, KahanSum> parts;
    std::map<RationalParams, std::pair<Params, double>> cache;
    model.data_space().for_each_point([&](PointView x) {
        const RationalParams key = estimator(x);
        auto it = cache.find(key);
        if (it == cache.end()) {
            Params theta = key.to_double();
            const double w = v(theta);
            it = cache.emplace(key, std::make_pair(std::move(theta), w)).first;
        }
        const auto& [theta, w] = it->second;
        parts[key] += w == 0.0 ? 0.0 : w * model.density(theta, x);
    });
    return total(parts);
}

double comp_via_pushforward(const DiscreteModel& model, const Luckiness& v, std::size_t budget)
{
    return comp_via_pushforward(
        model, [&model](PointView x) { return model.mle_rational(x); }, v, budget);
}

double comp_via_sufficient_stat(const DiscreteModel& model, const Luckiness& v, std::size_t budget)
{
    if (!model.has_sufficient_stat())
        throw Error(ErrorCode::no_sufficient_stat, model.id() + " registers no sufficient statistic");
    check_budget(model, budget);

    std::set<Point> image;
    model.data_space().for_each_point([&](PointView x) { image.insert(model.sufficient_stat(x)); });

    KahanSum sum;
    for (const Point& s : image) {
        const Params theta = model.mle_from_stat(s);
        const double w = v(theta);
        if (w == 0.0) continue;
        auto pmf = model.sufficient_stat_pmf(theta, s);
        if (!pmf) {
            KahanSum fiber;
            model.data_space().for_each_point([&](PointView x) {
                if (model.sufficient_stat(x) == s) fiber += model.density(theta, x);
            });
            pmf = fiber.value();
        }
        sum += w * *pmf;
    }
    return sum.value();
}

DiscreteCompResult comp_discrete_all(const DiscreteModel& model, const Luckiness& v, std::size_t budget)
{
    DiscreteCompResult r;
    r.brute = comp_bruteforce_discrete(model, v, budget);
    r.pushforward = comp_via_pushforward(model, v, budget);
    r.sufficient_stat = comp_via_sufficient_stat(model, v, budget);
    r.comp = r.brute;
    r.max_discrepancy = std::max({std::abs(r.brute - r.pushforward), std::abs(r.brute - r.sufficient_stat),
                                  std::abs(r.pushforward - r.sufficient_stat)});
    return r;
}

} // namespace nmlc
