#pragma once

#include "nmlc/estimator.hpp"
#include "nmlc/luckiness.hpp"
#include "nmlc/types.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmlc {

enum class SpaceKind { discrete, continuous };

/// Data space X in R^D. Discrete spaces are finite products of alphabets
/// {0, ..., a-1}; continuous spaces are boxes whose axes may be unbounded.
struct DataSpace {
    SpaceKind kind = SpaceKind::continuous;
    std::size_t dim = 0;
    std::vector<std::size_t> alphabet;
    std::vector<Interval> bounds;

    static DataSpace discrete(std::size_t dim, std::size_t alphabet_size);
    static DataSpace continuous(std::vector<Interval> bounds);

    void validate() const;
    bool contains(PointView x) const noexcept;
    /// Number of points of a discrete space, saturating at SIZE_MAX.
    std::size_t cardinality() const noexcept;
    /// Visits every point of a discrete space exactly once, in odometer order
    /// (first axis fastest).
    void for_each_point(const std::function<void(PointView)>& visit) const;
};

struct ParamSpace {
    std::size_t dim = 0;
    std::vector<Interval> bounds;
    /// Coordinates are the leading probabilities of a distribution, so they
    /// must also sum to at most one.
    bool simplex = false;

    void validate() const;
    bool contains(ParamView theta) const noexcept;
};

/// The maximizer of the likelihood. `boundary` flags an estimate that is only
/// a limit on the boundary of an open parameter space (a null set of data).
struct MleResult {
    Params theta;
    bool boundary = false;
};

/// A parametric family {mu_theta} on a data space. Discrete models report a
/// PMF through density(), continuous ones their canonical PDF.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string id() const = 0;
    virtual std::string description() const = 0;

    const DataSpace& data_space() const noexcept { return data_; }
    const ParamSpace& param_space() const noexcept { return param_; }
    bool is_discrete() const noexcept { return data_.kind == SpaceKind::discrete; }
    double default_log_base() const noexcept;

    virtual double density(ParamView theta, PointView x) const = 0;
    virtual double log_density(ParamView theta, PointView x) const;
    virtual MleResult mle(PointView x) const = 0;
    virtual std::vector<Point> sample(ParamView theta, std::uint64_t seed, std::size_t count) const = 0;

    virtual bool has_sufficient_stat() const noexcept { return false; }
    virtual Point sufficient_stat(PointView x) const;
    virtual Params mle_from_stat(PointView s) const;

protected:
    Model(DataSpace data, ParamSpace param);

    DataSpace data_;
    ParamSpace param_;
};

/// Exact rational parameter vector num / den, kept in lowest terms so it can
/// key estimator fibers without float equality.
struct RationalParams {
    std::vector<long long> num;
    long long den = 1;

    static RationalParams make(std::vector<long long> num, long long den);
    Params to_double() const;
    auto operator<=>(const RationalParams&) const = default;
};

using RationalEstimator = std::function<RationalParams(PointView)>;

class DiscreteModel : public Model {
public:
    virtual RationalParams mle_rational(PointView x) const = 0;
    /// PMF of the sufficient statistic under theta, when it has a closed form.
    virtual std::optional<double> sufficient_stat_pmf(ParamView theta, PointView s) const;

protected:
    using Model::Model;
};

/// Box standing in for an unbounded data space, with a bound on the
/// integrand mass it omits.
struct TruncatedBox {
    Box box;
    double tail_bound = 0.0;
    /// Per-axis QMC grading exponents suited to where the integrand lives.
    std::vector<double> qmc_grading;
};

/// Point mass in the distribution of an estimator (e.g. a clamped MLE).
struct EstimatorAtom {
    Params location;
    double mass = 0.0;
};

class ContinuousModel : public Model {
public:
    /// The MLE as a differentiable map, with fiber charts when available.
    virtual EstimatorMap mle_map() const = 0;

    /// Data box for integrating the MLE-plugin likelihood weighted by `v`,
    /// omitting less than `tail_tol`. Throws divergent when the weighted
    /// integral is infinite.
    virtual TruncatedBox truncation(const Luckiness& v, double tail_tol) const = 0;

    /// Density at theta_eval of the MLE under data drawn from theta_source.
    virtual std::optional<double> closed_form_pushforward_pdf(ParamView theta_source,
                                                              ParamView theta_eval) const;

    /// Singular part of the MLE distribution under theta (empty when the
    /// distribution is absolutely continuous).
    virtual std::vector<EstimatorAtom> estimator_atoms(ParamView theta_source) const;

    /// Values t of coordinate `axis` at which the (unclamped) MLE of x, with
    /// x[axis] replaced by t, equals `level`. Integrators use them as
    /// breakpoints; empty when unknown.
    virtual std::vector<double> mle_crossings(PointView x, std::size_t axis, double level) const;

protected:
    using Model::Model;
};

/// Checked access: x must lie in the model's data space.
MleResult mle(const Model& model, PointView x);

/// -log_b of the maximized likelihood; +inf when the maximum is zero and
/// -inf when the likelihood is unbounded at a boundary estimate.
double log_max_likelihood(const Model& model, PointView x, double base);

} // namespace nmlc
