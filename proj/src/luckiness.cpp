#include "nmlc/luckiness.hpp"

#include "nmlc/error.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace nmlc {

namespace {

double parse_double(std::string_view s)
{
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorCode::invalid_argument, "bad number in luckiness spec: " + std::string(s));
    return v;
}

std::string format_box(const Box& box)
{
    std::ostringstream out;
    out.precision(17);
    out << "box:";
    for (std::size_t i = 0; i < box.dim(); ++i) {
        if (i) out << ';';
        out << box.axes[i].lower << ',' << box.axes[i].upper;
    }
    return out.str();
}

} // namespace

Luckiness Luckiness::constant_one() { return {}; }

Luckiness Luckiness::indicator(Box box)
{
    if (box.dim() == 0) throw Error(ErrorCode::invalid_argument, "indicator luckiness needs a box");
    for (const auto& a : box.axes)
        if (!(a.lower <= a.upper))
            throw Error(ErrorCode::invalid_argument, "indicator luckiness box must satisfy lower <= upper");
    Luckiness v;
    v.kind_ = LuckinessKind::indicator_box;
    v.id_ = format_box(box);
    v.support_ = std::move(box);
    return v;
}

Luckiness Luckiness::custom(std::string name, std::function<double(ParamView)> fn,
                            std::optional<Box> support)
{
    if (!fn) throw Error(ErrorCode::invalid_argument, "custom luckiness needs a function");
    Luckiness v;
    v.kind_ = LuckinessKind::custom;
    v.id_ = "custom:" + name;
    v.fn_ = std::move(fn);
    v.support_ = std::move(support);
    return v;
}

Luckiness Luckiness::parse(std::string_view text)
{
    if (text == "const" || text == "one" || text == "1") return constant_one();
    if (text.substr(0, 4) != "box:")
        throw Error(ErrorCode::invalid_argument, "luckiness must be 'const' or 'box:lo,hi': " + std::string(text));
    text.remove_prefix(4);
    std::vector<Interval> axes;
    while (!text.empty()) {
        const auto semi = text.find(';');
        const std::string_view axis = text.substr(0, semi);
        const auto comma = axis.find(',');
        if (comma == std::string_view::npos)
            throw Error(ErrorCode::invalid_argument, "luckiness box axis needs 'lo,hi'");
        axes.push_back({parse_double(axis.substr(0, comma)), parse_double(axis.substr(comma + 1))});
        if (semi == std::string_view::npos) break;
        text.remove_prefix(semi + 1);
    }
    return indicator(Box(std::move(axes)));
}

double Luckiness::operator()(ParamView theta) const
{
    switch (kind_) {
    case LuckinessKind::constant_one: return 1.0;
    case LuckinessKind::indicator_box: return support_->contains(theta) ? 1.0 : 0.0;
    case LuckinessKind::custom: {
        const double v = fn_(theta);
        if (!(v >= 0.0)) throw Error(ErrorCode::invalid_argument, "luckiness returned a negative value");
        return v;
    }
    }
    return 0.0;
}

Luckiness Luckiness::scaled(double c) const
{
    if (!(c >= 0.0)) throw Error(ErrorCode::invalid_argument, "luckiness scale must be nonnegative");
    Luckiness base = *this;
    std::ostringstream name;
    name.precision(17);
    name << c << '*' << id_;
    return custom(name.str(), [base, c](ParamView t) { return c * base(t); }, support_);
}

} // namespace nmlc
