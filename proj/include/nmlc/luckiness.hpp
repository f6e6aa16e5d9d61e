#pragma once

#include "nmlc/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace nmlc {

enum class LuckinessKind { constant_one, indicator_box, custom };

/// Nonnegative weight on parameter space. The constant-one function turns
/// every luckiness-weighted quantity back into its plain counterpart.
class Luckiness {
public:
    Luckiness() = default;

    static Luckiness constant_one();
    /// Indicator of the closed box.
    static Luckiness indicator(Box box);
    static Luckiness indicator(double lower, double upper) { return indicator(Box({{lower, upper}})); }
    /// `support` bounds where the function may be nonzero, if known.
    static Luckiness custom(std::string name, std::function<double(ParamView)> fn,
                            std::optional<Box> support = std::nullopt);

    /// Parses "const", "one" or "box:lo,hi[;lo,hi...]".
    static Luckiness parse(std::string_view text);

    LuckinessKind kind() const noexcept { return kind_; }
    double operator()(ParamView theta) const;
    /// Box outside which the function vanishes (indicator and bounded custom).
    const std::optional<Box>& support() const noexcept { return support_; }
    const std::string& id() const noexcept { return id_; }

    /// c * v, as a custom luckiness (c >= 0).
    Luckiness scaled(double c) const;

private:
    LuckinessKind kind_ = LuckinessKind::constant_one;
    std::string id_ = "const";
    std::optional<Box> support_;
    std::function<double(ParamView)> fn_;
};

inline double luckiness_eval(const Luckiness& v, ParamView theta) { return v(theta); }

} // namespace nmlc
