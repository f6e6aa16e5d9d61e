#include "nmlc/model.hpp"

#include "nmlc/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace nmlc {

DataSpace DataSpace::discrete(std::size_t dim, std::size_t alphabet_size)
{
    DataSpace s;
    s.kind = SpaceKind::discrete;
    s.dim = dim;
    s.alphabet.assign(dim, alphabet_size);
    s.validate();
    return s;
}

DataSpace DataSpace::continuous(std::vector<Interval> bounds)
{
    DataSpace s;
    s.kind = SpaceKind::continuous;
    s.dim = bounds.size();
    s.bounds = std::move(bounds);
    s.validate();
    return s;
}

void DataSpace::validate() const
{
    if (dim < 1) throw Error(ErrorCode::invalid_argument, "data space dimension must be >= 1");
    if (kind == SpaceKind::discrete) {
        if (alphabet.size() != dim) throw Error(ErrorCode::invalid_argument, "one alphabet per axis");
        for (auto a : alphabet)
            if (a < 1) throw Error(ErrorCode::invalid_argument, "alphabets must be nonempty");
    } else {
        if (bounds.size() != dim) throw Error(ErrorCode::invalid_argument, "one interval per axis");
        for (const auto& b : bounds)
            if (!(b.lower < b.upper))
                throw Error(ErrorCode::invalid_argument, "continuous axes need lower < upper");
    }
}

bool DataSpace::contains(PointView x) const noexcept
{
    if (x.size() != dim) return false;
    for (std::size_t i = 0; i < dim; ++i) {
        if (kind == SpaceKind::discrete) {
            if (x[i] < 0.0 || x[i] != std::floor(x[i]) || x[i] >= static_cast<double>(alphabet[i]))
                return false;
        } else if (!(x[i] >= bounds[i].lower && x[i] <= bounds[i].upper)) {
            return false;
        }
    }
    return true;
}

std::size_t DataSpace::cardinality() const noexcept
{
    if (kind != SpaceKind::discrete) return std::numeric_limits<std::size_t>::max();
    std::size_t n = 1;
    for (auto a : alphabet) {
        if (n > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
        n *= a;
    }
    return n;
}

void DataSpace::for_each_point(const std::function<void(PointView)>& visit) const
{
    if (kind != SpaceKind::discrete)
        throw Error(ErrorCode::invalid_argument, "only discrete data spaces can be enumerated");
    Point x(dim, 0.0);
    while (true) {
        visit(x);
        std::size_t d = 0;
        for (; d < dim; ++d) {
            x[d] += 1.0;
            if (x[d] < static_cast<double>(alphabet[d])) break;
            x[d] = 0.0;
        }
        if (d == dim) return;
    }
}

void ParamSpace::validate() const
{
    if (dim < 1) throw Error(ErrorCode::invalid_argument, "parameter space dimension must be >= 1");
    if (bounds.size() != dim) throw Error(ErrorCode::invalid_argument, "one interval per parameter axis");
}

bool ParamSpace::contains(ParamView theta) const noexcept
{
    if (theta.size() != dim) return false;
    double total = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        if (!bounds[i].contains(theta[i])) return false;
        total += theta[i];
    }
    return !simplex || total <= 1.0 + 1e-12;
}

Model::Model(DataSpace data, ParamSpace param) : data_(std::move(data)), param_(std::move(param))
{
    data_.validate();
    param_.validate();
}

double Model::default_log_base() const noexcept { return is_discrete() ? 2.0 : std::numbers::e; }

double Model::log_density(ParamView theta, PointView x) const { return std::log(density(theta, x)); }

Point Model::sufficient_stat(PointView) const
{
    throw Error(ErrorCode::no_sufficient_stat, id() + " registers no sufficient statistic");
}

Params Model::mle_from_stat(PointView) const
{
    throw Error(ErrorCode::no_sufficient_stat, id() + " registers no sufficient statistic");
}

RationalParams RationalParams::make(std::vector<long long> num, long long den)
{
    if (den == 0) throw Error(ErrorCode::invalid_argument, "rational parameter with zero denominator");
    if (den < 0) {
        den = -den;
        for (auto& n : num) n = -n;
    }
    long long g = den;
    for (auto n : num) g = std::gcd(g, n);
    if (g > 1) {
        den /= g;
        for (auto& n : num) n /= g;
    }
    return {std::move(num), den};
}

Params RationalParams::to_double() const
{
    Params p(num.size());
    for (std::size_t i = 0; i < num.size(); ++i)
        p[i] = static_cast<double>(num[i]) / static_cast<double>(den);
    return p;
}

std::optional<double> DiscreteModel::sufficient_stat_pmf(ParamView, PointView) const { return std::nullopt; }

std::optional<double> ContinuousModel::closed_form_pushforward_pdf(ParamView, ParamView) const
{
    return std::nullopt;
}

std::vector<EstimatorAtom> ContinuousModel::estimator_atoms(ParamView) const { return {}; }

std::vector<double> ContinuousModel::mle_crossings(PointView, std::size_t, double) const { return {}; }

MleResult mle(const Model& model, PointView x)
{
    if (!model.data_space().contains(x))
        throw Error(ErrorCode::out_of_domain, "data point lies outside the data space of " + model.id());
    return model.mle(x);
}

double log_max_likelihood(const Model& model, PointView x, double base)
{
    if (!(base > 1.0)) throw Error(ErrorCode::invalid_argument, "log base must exceed 1");
    const MleResult m = mle(model, x);
    return -model.log_density(m.theta, x) / std::log(base);
}

} // namespace nmlc
