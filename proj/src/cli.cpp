#include "nmlc/cli.hpp"

#include "nmlc/continuous.hpp"
#include "nmlc/discrete.hpp"
#include "nmlc/error.hpp"
#include "nmlc/geometry.hpp"
#include "nmlc/zoo.hpp"
#include "json_number.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

namespace nmlc {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& message)
{
    throw Error(ErrorCode::invalid_argument, path + ": " + message);
}

std::string string_field(const json& j, const std::string& path)
{
    if (!j.is_string()) bad_field(path, "expected a string");
    return j.get<std::string>();
}

std::size_t count_field(const json& j, const std::string& path)
{
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        bad_field(path, "expected a non-negative integer");
    return j.get<std::size_t>();
}

double number_field(const json& j, const std::string& path)
{
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known)
{
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            bad_field(path + "." + key, "unknown field");
    }
}

std::string fmt(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

// ---------------------------------------------------------------------------

struct PreparedModel {
    ModelSpec spec;
    std::unique_ptr<Model> model;
    Luckiness luckiness;

    const ContinuousModel* continuous() const { return dynamic_cast<const ContinuousModel*>(model.get()); }
    const DiscreteModel* discrete() const { return dynamic_cast<const DiscreteModel*>(model.get()); }
};

struct Prepared {
    std::vector<PreparedModel> models;
    double base = 2.0;
    std::vector<Point> data;
    std::string method;
};

const std::vector<std::string> kCommands = {"comp", "nml", "select", "verify", "list-models"};
const std::vector<std::string> kDiscreteMethods = {"all", "brute", "pushforward", "sufficient-stat"};
const std::vector<std::string> kContinuousMethods = {"both", "all", "gfunction", "brute"};

bool one_of(const std::string& s, const std::vector<std::string>& options)
{
    return std::find(options.begin(), options.end(), s) != options.end();
}

QuadratureSpec data_quadrature(const ContinuousModel& m, const RunConfig& c)
{
    QuadratureSpec q = default_data_quadrature(m);
    const auto& o = c.quadrature;
    if (o.method) q.method = parse_quad_method(*o.method);
    if (o.resolution) q.resolution = *o.resolution;
    if (o.tolerance) q.abs_tol = q.rel_tol = *o.tolerance;
    if (o.budget) q.budget = *o.budget;
    if (o.replicates) q.replicates = *o.replicates;
    q.seed = c.seed;
    q.validate();
    if (q.method != QuadMethod::qmc && m.data_space().dim > 3)
        bad_field("config.quadrature.method", "grid and adaptive quadrature support at most 3 data dimensions");
    return q;
}

QuadratureSpec outer_quadrature(const RunConfig& c)
{
    QuadratureSpec q;
    q.abs_tol = 1e-12;
    q.rel_tol = 1e-12;
    if (c.quadrature.tolerance) q.abs_tol = q.rel_tol = *c.quadrature.tolerance;
    q.validate();
    return q;
}

EstimatorPdfSource pdf_source(const RunConfig& c)
{
    EstimatorPdfSource s;
    s.kind = parse_pdf_source(c.source);
    s.seed = c.seed;
    return s;
}

Prepared prepare(const RunConfig& c)
{
    Prepared p;
    if (!one_of(c.command, kCommands)) bad_field("config.command", "unknown command '" + c.command + "'");
    if (c.command == "verify" || c.command == "list-models") return p;

    if (c.models.empty()) bad_field("config.models", "at least one model is required");
    if (c.command == "comp" && c.models.size() != 1) bad_field("config.models", "comp takes exactly one model");
    if (c.command == "nml" && c.models.size() != 1) bad_field("config.models", "nml takes exactly one model");
    if (c.command == "select" && c.models.size() < 2) bad_field("config.models", "select needs at least two models");

    for (std::size_t i = 0; i < c.models.size(); ++i) {
        const auto& spec = c.models[i];
        PreparedModel pm;
        pm.spec = spec;
        pm.model = make_model(spec.id, spec.params);
        const std::string text = spec.luckiness.value_or(c.luckiness);
        pm.luckiness = Luckiness::parse(text);
        if (const auto& s = pm.luckiness.support(); s && s->dim() != pm.model->param_space().dim)
            bad_field("config.models[" + std::to_string(i) + "]", "luckiness box dimension differs from the parameter dimension");
        p.models.push_back(std::move(pm));
    }

    const auto& first = *p.models.front().model;
    p.base = c.base.value_or(first.default_log_base());
    if (!(p.base > 1.0)) bad_field("config.base", "must exceed 1");

    parse_pdf_source(c.source);
    if (c.source == "mc-histogram") bad_field("config.source", "the histogram density is a cross-check only");

    if (c.command == "comp") {
        const auto& pm = p.models.front();
        if (pm.discrete()) {
            p.method = c.method.value_or("all");
            if (!one_of(p.method, kDiscreteMethods)) bad_field("config.method", "unknown discrete method '" + p.method + "'");
        } else {
            p.method = c.method.value_or("both");
            if (!one_of(p.method, kContinuousMethods)) bad_field("config.method", "unknown continuous method '" + p.method + "'");
        }
        if (c.curves && !pm.continuous()) bad_field("config.curves", "curves exist for continuous models only");
    } else {
        p.method = c.method.value_or("gfunction");
        if (p.method != "gfunction" && p.method != "brute")
            bad_field("config.method", "nml and select take gfunction or brute");
        if (!c.data) bad_field("config.data", "a data file is required");
        const std::size_t dim = first.data_space().dim;
        for (const auto& pm : p.models)
            if (pm.model->data_space().dim != dim) bad_field("config.models", "all candidates must share the data dimension");
        p.data = read_data_csv(*c.data, dim);
        if (p.data.empty()) bad_field("config.data", "no data rows");
        for (std::size_t r = 0; r < p.data.size(); ++r)
            for (const auto& pm : p.models)
                if (!pm.model->data_space().contains(p.data[r]))
                    bad_field(*c.data + ":row " + std::to_string(r + 1), "point lies outside the data space of " + pm.model->id());
    }

    for (const auto& pm : p.models)
        if (const auto* cm = pm.continuous()) data_quadrature(*cm, c);
    outer_quadrature(c);
    if (c.box) {
        if (c.command != "comp" || !p.models.front().continuous())
            bad_field("config.box", "applies to the continuous comp command only");
        if (c.box->size() != first.data_space().dim) bad_field("config.box", "dimension differs from the data dimension");
        for (const auto& axis : *c.box)
            if (!(axis.lower < axis.upper) || !axis.finite()) bad_field("config.box", "axes need finite lower < upper");
    }
    return p;
}

// ---------------------------------------------------------------------------

json model_header(const PreparedModel& pm)
{
    return {{"model", pm.spec.id},
            {"params", pm.spec.params},
            {"description", pm.model->description()},
            {"luckiness", pm.luckiness.id()}};
}

void add_log_fields(json& j, double value, double base)
{
    j["comp"] = detail::report_number(value);
    j["log_value"] = detail::report_number(std::log(value));
    j["log_comp"] = detail::report_number(std::log(value) / std::log(base));
}

// The comp of a candidate as used by nml and select.
CompReport candidate_comp(const PreparedModel& pm, const RunConfig& c, const std::string& method)
{
    if (const auto* dm = pm.discrete()) {
        CompReport r;
        r.model = pm.model->id();
        r.luckiness = pm.luckiness.id();
        r.method = "brute";
        r.value = comp_bruteforce_discrete(*dm, pm.luckiness);
        return r;
    }
    const auto& cm = *pm.continuous();
    if (method == "brute") return comp_bruteforce_continuous(cm, pm.luckiness, data_quadrature(cm, c));
    return lmc_gfunction(cm, pm.luckiness, pdf_source(c), outer_quadrature(c));
}

void write_curves(const ContinuousModel& m, const Luckiness& v, const RunConfig& c)
{
    Interval dom = m.param_space().bounds[0];
    if (const auto& s = v.support()) {
        dom.lower = std::max(dom.lower, s->axes[0].lower);
        dom.upper = std::min(dom.upper, s->axes[0].upper);
    }
    if (!std::isfinite(dom.lower)) dom.lower = std::isfinite(dom.upper) ? dom.upper - 10.0 : -10.0;
    if (!std::isfinite(dom.upper)) dom.upper = dom.lower + 10.0;
    const GFunction g = diagonal(m, pdf_source(c));
    std::ofstream out(*c.curves);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write curves file " + *c.curves);
    out << "theta,g\n" << std::setprecision(17);
    constexpr int kPoints = 256;
    for (int i = 0; i < kPoints; ++i) {
        const double t = dom.lower + (dom.upper - dom.lower) * (i + 0.5) / kPoints;
        out << t << ',' << g(t) << '\n';
    }
}

json run_comp(const Prepared& p, const RunConfig& c, std::ostream& out)
{
    const PreparedModel& pm = p.models.front();
    json result = model_header(pm);
    result["base"] = p.base;
    out << std::left << std::setw(28) << "method" << std::setw(22) << "comp" << std::setw(22) << "log_b comp"
        << "error_estimate\n";
    auto row = [&](const std::string& name, double value, double error) {
        out << std::left << std::setw(28) << name << std::setw(22) << fmt(value) << std::setw(22)
            << fmt(std::log(value) / std::log(p.base)) << fmt(error) << '\n';
    };

    if (const auto* dm = pm.discrete()) {
        result["kind"] = "discrete";
        json methods = json::object();
        std::vector<double> values;
        auto record = [&](const char* name, double value) {
            methods[name] = detail::report_number(value);
            values.push_back(value);
            row(name, value, 0.0);
        };
        const bool all = p.method == "all";
        if (all || p.method == "brute") record("brute", comp_bruteforce_discrete(*dm, pm.luckiness));
        if (all || p.method == "pushforward") record("pushforward", comp_via_pushforward(*dm, pm.luckiness));
        if (all || p.method == "sufficient-stat") record("sufficient_stat", comp_via_sufficient_stat(*dm, pm.luckiness));
        result["methods"] = methods;
        add_log_fields(result, values.front(), p.base);
        double spread = 0.0;
        for (double a : values)
            for (double b : values) spread = std::max(spread, std::abs(a - b));
        result["max_discrepancy"] = detail::report_number(spread);
        return result;
    }

    const auto& cm = *pm.continuous();
    result["kind"] = "continuous";
    const bool both = p.method == "both" || p.method == "all";
    std::optional<CompReport> gf;
    std::optional<CompReport> brute;
    if (both || p.method == "gfunction") gf = lmc_gfunction(cm, pm.luckiness, pdf_source(c), outer_quadrature(c));
    if (both || p.method == "brute") {
        std::optional<Box> box;
        if (c.box) box = Box(*c.box);
        brute = comp_bruteforce_continuous(cm, pm.luckiness, data_quadrature(cm, c), box);
    }
    if (gf && brute && !gf->divergent && !brute->divergent) {
        const double residual = std::abs(gf->value - brute->value) / std::max(std::abs(brute->value), 1e-300);
        gf->cross_check_residual = residual;
        brute->cross_check_residual = residual;
        result["cross_check_residual"] = detail::report_number(residual);
    }
    json methods = json::object();
    if (gf) {
        methods["gfunction"] = to_json(*gf);
        row(gf->method, gf->value, gf->error_estimate);
    }
    if (brute) {
        methods["brute"] = to_json(*brute);
        row(brute->method, brute->value, brute->error_estimate);
    }
    result["methods"] = methods;
    const CompReport& primary = gf ? *gf : *brute;
    add_log_fields(result, primary.value, p.base);
    result["divergent"] = primary.divergent;
    if (primary.divergent) {
        result["diagnostic"] = primary.diagnostic;
        out << "diverges: " << primary.diagnostic << '\n';
    }
    if (c.curves) write_curves(cm, pm.luckiness, c);
    return result;
}

json point_json(const Point& x)
{
    json j = json::array();
    for (double v : x) j.push_back(detail::report_number(v));
    return j;
}

json run_nml(const Prepared& p, const RunConfig& c, std::ostream& out)
{
    const PreparedModel& pm = p.models.front();
    const CompReport comp = candidate_comp(pm, c, p.method);
    json result = model_header(pm);
    result["base"] = p.base;
    result["comp_report"] = to_json(comp);
    json rows = json::array();
    out << std::left << std::setw(8) << "row" << std::setw(22) << "l_ml" << std::setw(22) << "log_b comp" << "l_nml\n";
    for (std::size_t r = 0; r < p.data.size(); ++r) {
        const NmlResult n = nml_code_length(*pm.model, p.data[r], comp, p.base);
        json j = to_json(n);
        j["row"] = r + 1;
        j["x"] = point_json(p.data[r]);
        rows.push_back(j);
        out << std::left << std::setw(8) << r + 1 << std::setw(22) << fmt(n.l_ml) << std::setw(22) << fmt(n.log_comp)
            << fmt(n.l_nml) << '\n';
    }
    result["rows"] = rows;
    return result;
}

json run_select(const Prepared& p, const RunConfig& c, std::ostream& out)
{
    std::vector<SelectionCandidate> candidates;
    json listed = json::array();
    for (const auto& pm : p.models) {
        SelectionCandidate cand{pm.model.get(), candidate_comp(pm, c, p.method)};
        json j = model_header(pm);
        j["comp_report"] = to_json(cand.comp);
        listed.push_back(j);
        candidates.push_back(std::move(cand));
    }
    json rows = json::array();
    out << std::left << std::setw(8) << "row" << std::setw(24) << "selected" << "l_nml per candidate\n";
    for (std::size_t r = 0; r < p.data.size(); ++r) {
        const SelectionResult s = select_model(candidates, p.data[r], p.base);
        json lengths = json::array();
        std::string line;
        for (const auto& n : s.code_lengths) {
            lengths.push_back(to_json(n));
            line += fmt(n.l_nml) + "  ";
        }
        rows.push_back({{"row", r + 1},
                        {"x", point_json(p.data[r])},
                        {"selected", s.index},
                        {"selected_model", p.models[s.index].spec.id},
                        {"code_lengths", lengths}});
        out << std::left << std::setw(8) << r + 1 << std::setw(24)
            << (std::to_string(s.index) + " " + p.models[s.index].spec.id) << line << '\n';
    }
    return {{"base", p.base}, {"candidates", listed}, {"rows", rows}};
}

json run_verify(const RunConfig& c, std::ostream& out, bool& all_passed)
{
    std::vector<std::string> ids;
    const std::string which = c.verify_case.value_or("all");
    if (which == "all") {
        ids = coarea_case_ids();
    } else {
        ids = {which};
    }
    json cases = json::array();
    all_passed = true;
    out << std::left << std::setw(22) << "case" << std::setw(22) << "lhs" << std::setw(22) << "rhs" << std::setw(20)
        << "rel_residual" << "status\n";
    for (const auto& id : ids) {
        const CoareaReport r = verify_coarea(id);
        all_passed = all_passed && r.passed;
        cases.push_back(to_json(r));
        out << std::left << std::setw(22) << id << std::setw(22) << fmt(r.lhs) << std::setw(22) << fmt(r.rhs)
            << std::setw(20) << fmt(r.rel_residual) << (r.passed ? "pass" : "FAIL") << '\n';
    }
    return {{"cases", cases}, {"passed", all_passed}};
}

void emit(const json& report, const RunConfig& c, std::ostream& out)
{
    if (!c.output) return;
    const std::string text = report.dump(2) + "\n";
    if (*c.output == "-") {
        out << text;
        return;
    }
    std::ofstream file(*c.output, std::ios::binary);
    if (!file) throw Error(ErrorCode::invalid_argument, "cannot write report file " + *c.output);
    file << text;
}

} // namespace

// ---------------------------------------------------------------------------

RunConfig config_from_json(const json& j)
{
    if (!j.is_object()) bad_field("config", "expected an object");
    reject_unknown(j, "config",
                   {"command", "models", "luckiness", "method", "source", "quadrature", "box", "base", "data", "output",
                    "curves", "case", "seed"});
    RunConfig c;
    if (!j.contains("command")) bad_field("config.command", "missing");
    c.command = string_field(j.at("command"), "config.command");
    if (j.contains("models")) {
        const auto& ms = j.at("models");
        if (!ms.is_array()) bad_field("config.models", "expected an array");
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const std::string path = "config.models[" + std::to_string(i) + "]";
            const auto& m = ms[i];
            if (!m.is_object()) bad_field(path, "expected an object");
            reject_unknown(m, path, {"id", "params", "luckiness"});
            ModelSpec spec;
            if (!m.contains("id")) bad_field(path + ".id", "missing");
            spec.id = string_field(m.at("id"), path + ".id");
            if (m.contains("params")) {
                if (!m.at("params").is_object()) bad_field(path + ".params", "expected an object");
                spec.params = m.at("params");
            }
            if (m.contains("luckiness")) spec.luckiness = string_field(m.at("luckiness"), path + ".luckiness");
            c.models.push_back(std::move(spec));
        }
    }
    if (j.contains("luckiness")) c.luckiness = string_field(j.at("luckiness"), "config.luckiness");
    if (j.contains("method")) c.method = string_field(j.at("method"), "config.method");
    if (j.contains("source")) c.source = string_field(j.at("source"), "config.source");
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        if (!q.is_object()) bad_field("config.quadrature", "expected an object");
        reject_unknown(q, "config.quadrature", {"method", "resolution", "tolerance", "budget", "replicates"});
        if (q.contains("method")) c.quadrature.method = string_field(q.at("method"), "config.quadrature.method");
        if (q.contains("resolution"))
            c.quadrature.resolution = count_field(q.at("resolution"), "config.quadrature.resolution");
        if (q.contains("tolerance"))
            c.quadrature.tolerance = number_field(q.at("tolerance"), "config.quadrature.tolerance");
        if (q.contains("budget")) c.quadrature.budget = count_field(q.at("budget"), "config.quadrature.budget");
        if (q.contains("replicates"))
            c.quadrature.replicates = count_field(q.at("replicates"), "config.quadrature.replicates");
        if (c.quadrature.method) {
            try {
                parse_quad_method(*c.quadrature.method);
            } catch (const Error&) {
                bad_field("config.quadrature.method", "unknown method '" + *c.quadrature.method + "'");
            }
        }
    }
    if (j.contains("box")) {
        const auto& b = j.at("box");
        if (!b.is_array()) bad_field("config.box", "expected an array of [lower, upper] pairs");
        std::vector<Interval> axes;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const std::string path = "config.box[" + std::to_string(i) + "]";
            if (!b[i].is_array() || b[i].size() != 2) bad_field(path, "expected [lower, upper]");
            axes.push_back({number_field(b[i][0], path + "[0]"), number_field(b[i][1], path + "[1]")});
        }
        c.box = std::move(axes);
    }
    if (j.contains("base")) c.base = number_field(j.at("base"), "config.base");
    if (j.contains("data")) c.data = string_field(j.at("data"), "config.data");
    if (j.contains("output")) c.output = string_field(j.at("output"), "config.output");
    if (j.contains("curves")) c.curves = string_field(j.at("curves"), "config.curves");
    if (j.contains("case")) c.verify_case = string_field(j.at("case"), "config.case");
    if (j.contains("seed")) c.seed = count_field(j.at("seed"), "config.seed");
    return c;
}

json to_json(const RunConfig& c)
{
    json models = json::array();
    for (const auto& m : c.models) {
        json jm = {{"id", m.id}, {"params", m.params}};
        if (m.luckiness) jm["luckiness"] = *m.luckiness;
        models.push_back(jm);
    }
    json j = {{"command", c.command},
              {"models", models},
              {"luckiness", c.luckiness},
              {"source", c.source},
              {"seed", c.seed}};
    if (c.method) j["method"] = *c.method;
    if (!c.quadrature.empty()) {
        json q = json::object();
        if (c.quadrature.method) q["method"] = *c.quadrature.method;
        if (c.quadrature.resolution) q["resolution"] = *c.quadrature.resolution;
        if (c.quadrature.tolerance) q["tolerance"] = *c.quadrature.tolerance;
        if (c.quadrature.budget) q["budget"] = *c.quadrature.budget;
        if (c.quadrature.replicates) q["replicates"] = *c.quadrature.replicates;
        j["quadrature"] = q;
    }
    if (c.box) {
        json b = json::array();
        for (const auto& axis : *c.box) b.push_back({axis.lower, axis.upper});
        j["box"] = b;
    }
    if (c.base) j["base"] = *c.base;
    if (c.data) j["data"] = *c.data;
    if (c.output) j["output"] = *c.output;
    if (c.curves) j["curves"] = *c.curves;
    if (c.verify_case) j["case"] = *c.verify_case;
    return j;
}

std::vector<Point> read_data_csv(const std::string& path, std::size_t dim)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot read data file " + path);
    std::vector<Point> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        Point x;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
                throw Error(ErrorCode::invalid_argument,
                            path + ":" + std::to_string(line_no) + ": not a finite number: '" + cell + "'");
            x.push_back(v);
        }
        if (x.size() != dim)
            throw Error(ErrorCode::invalid_argument, path + ":" + std::to_string(line_no) + ": expected " +
                                                         std::to_string(dim) + " columns, found " +
                                                         std::to_string(x.size()));
        rows.push_back(std::move(x));
    }
    return rows;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    Prepared p;
    try {
        p = prepare(config);
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    json report = {{"command", config.command}, {"config", to_json(config)}};
    int status = kExitOk;
    try {
        if (config.command == "list-models") {
            report["result"] = model_catalog();
            for (const auto& m : report["result"]["models"])
                out << std::left << std::setw(22) << m["id"].get<std::string>() << std::setw(12)
                    << m["data_space"].get<std::string>() << m["description"].get<std::string>() << '\n';
        } else if (config.command == "verify") {
            bool passed = true;
            report["result"] = run_verify(config, out, passed);
            if (!passed) status = kExitComputation;
        } else if (config.command == "comp") {
            report["result"] = run_comp(p, config, out);
        } else if (config.command == "nml") {
            report["result"] = run_nml(p, config, out);
        } else {
            report["result"] = run_select(p, config, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::invalid_argument && config.command == "verify" ? kExitConfig : kExitComputation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitComputation;
    }

    try {
        emit(report, config, out);
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return status;
}

} // namespace nmlc
