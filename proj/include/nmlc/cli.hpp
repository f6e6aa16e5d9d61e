#pragma once

#include "nmlc/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nmlc {

struct ModelSpec {
    std::string id;
    nlohmann::json params = nlohmann::json::object();
    /// Overrides RunConfig::luckiness for this model.
    std::optional<std::string> luckiness;
};

/// Quadrature fields a config may set; unset fields keep the per-route defaults.
struct QuadOverrides {
    std::optional<std::string> method;
    std::optional<std::size_t> resolution;
    std::optional<double> tolerance;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> replicates;

    bool empty() const noexcept { return !method && !resolution && !tolerance && !budget && !replicates; }
};

/// One command invocation. Serializes to the JSON config format and back
/// without change.
struct RunConfig {
    /// comp, nml, select, verify or list-models.
    std::string command;
    std::vector<ModelSpec> models;
    std::string luckiness = "const";
    /// comp route: discrete all|brute|pushforward|sufficient-stat,
    /// continuous both|gfunction|brute. Unset picks all / both.
    std::optional<std::string> method;
    /// Estimator density source for the g-function route.
    std::string source = "closed-form";
    QuadOverrides quadrature;
    /// Data box for the continuous brute-force route.
    std::optional<std::vector<Interval>> box;
    std::optional<double> base;
    std::optional<std::string> data;
    std::optional<std::string> output;
    std::optional<std::string> curves;
    std::optional<std::string> verify_case;
    std::uint64_t seed = 1;
};

/// Throws invalid_argument naming the offending field path (e.g.
/// "config.models[1].id").
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitConfig = 2;

/// Executes a command: a summary table on `out`, diagnostics on `err`, the
/// JSON report at config.output ("-" for `out`) and curves at config.curves.
/// Returns 0 on success, 1 on a computation error, 2 on a config error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Reads a data file: one point per line, comma-separated, `dim` columns.
/// Blank lines and lines starting with '#' are skipped.
std::vector<Point> read_data_csv(const std::string& path, std::size_t dim);

} // namespace nmlc
