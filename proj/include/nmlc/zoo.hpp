#pragma once

#include "nmlc/model.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace nmlc {

/// Bernoulli sequences of length N; theta = P(x_n = 1).
std::unique_ptr<DiscreteModel> make_bernoulli(int n);
/// Categorical sequences of length N over m symbols; theta holds the first
/// m - 1 symbol probabilities.
std::unique_ptr<DiscreteModel> make_multinomial(int categories, int n);

/// N i.i.d. exponential observations with mean theta.
std::unique_ptr<ContinuousModel> make_exponential(int n);
/// The exponential model restricted to theta in [lower, upper]; its MLE is
/// the sample mean clamped to that interval.
std::unique_ptr<ContinuousModel> make_exponential_clamped(int n, double lower, double upper);
/// The exponential model parametrized by its rate lambda = 1 / theta.
std::unique_ptr<ContinuousModel> make_exponential_rate(int n);
/// N i.i.d. unit-variance normal observations with unknown mean.
std::unique_ptr<ContinuousModel> make_gauss_mean(int n);
/// Zero-centred bivariate normal with density 2/(pi theta) exp(-(x1^2 + 4 x2^2) / theta).
std::unique_ptr<ContinuousModel> make_aniso_gauss_2d();

/// Builds a zoo model from its id and JSON parameter block (fields "N",
/// "m", "clamp"; unknown fields are ignored). Throws unknown_model or
/// invalid_argument.
std::unique_ptr<Model> make_model(std::string_view id, const nlohmann::json& params);

std::vector<std::string> model_ids();

/// Zoo ids with their parameter schemas.
nlohmann::json model_catalog();

} // namespace nmlc
