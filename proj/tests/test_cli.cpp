#include "nmlc/cli.hpp"
#include "nmlc/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace nmlc;
using nlohmann::json;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() / ("nmlc-cli-" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name, const std::string& content = {}) const
    {
        const auto p = path / name;
        if (!content.empty()) std::ofstream(p) << content;
        return p.string();
    }
};

struct Outcome {
    int status;
    std::string out;
    std::string err;
};

Outcome exec(const RunConfig& c)
{
    std::ostringstream out, err;
    const int status = run(c, out, err);
    return {status, out.str(), err.str()};
}

RunConfig comp_config(const std::string& model, json params, const std::string& luckiness)
{
    RunConfig c;
    c.command = "comp";
    c.models.push_back({model, std::move(params), std::nullopt});
    c.luckiness = luckiness;
    c.output = "-";
    return c;
}

json report_of(const Outcome& o)
{
    const auto start = o.out.find("{\n");
    REQUIRE(start != std::string::npos);
    return json::parse(o.out.substr(start));
}

std::string config_error(const json& j)
{
    try {
        config_from_json(j);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_argument);
        return e.what();
    }
    FAIL("expected a config error");
    return {};
}

} // namespace

TEST_CASE("config round-trips through JSON")
{
    RunConfig c;
    c.command = "select";
    c.models.push_back({"exponential", {{"N", 3}}, "box:0.5,5"});
    c.models.push_back({"gauss-mean", {{"N", 3}}, std::nullopt});
    c.luckiness = "box:-5,5";
    c.method = "gfunction";
    c.source = "coarea-chart";
    c.quadrature.method = "qmc";
    c.quadrature.budget = 4096;
    c.quadrature.replicates = 8;
    c.quadrature.tolerance = 1e-7;
    c.box = std::vector<Interval>{{0.0, 60.0}, {0.0, 60.0}, {0.0, 60.0}};
    c.base = 2.0;
    c.data = "x.csv";
    c.output = "r.json";
    c.seed = 7;
    const json j = to_json(c);
    CHECK(to_json(config_from_json(j)) == j);
    CHECK(to_json(config_from_json(json::parse(j.dump()))) == j);

    RunConfig minimal;
    minimal.command = "list-models";
    const json jm = to_json(minimal);
    CHECK(!jm.contains("quadrature"));
    CHECK(to_json(config_from_json(jm)) == jm);
}

TEST_CASE("config errors name the offending field")
{
    CHECK(config_error(json::array()).find("config") != std::string::npos);
    CHECK(config_error({{"models", json::array()}}).find("config.command") != std::string::npos);
    CHECK(config_error({{"command", "comp"}, {"colour", 1}}).find("config.colour") != std::string::npos);
    CHECK(config_error({{"command", "comp"}, {"models", {{{"id", "bernoulli"}}, {{"params", {}}}}}})
              .find("config.models[1].id") != std::string::npos);
    CHECK(config_error({{"command", "comp"}, {"models", {{{"id", 3}}}}}).find("config.models[0].id") !=
          std::string::npos);
    CHECK(config_error({{"command", "comp"}, {"quadrature", {{"method", "simpson"}}}})
              .find("config.quadrature.method") != std::string::npos);
    CHECK(config_error({{"command", "comp"}, {"quadrature", {{"budget", -4}}}}).find("config.quadrature.budget") !=
          std::string::npos);
    CHECK(config_error({{"command", "comp"}, {"box", {{0, 1}, {2}}}}).find("config.box[1]") != std::string::npos);
}

TEST_CASE("exit codes")
{
    auto ok = exec(comp_config("bernoulli", {{"N", 2}}, "const"));
    CHECK(ok.status == kExitOk);

    auto unknown = exec(comp_config("foo", json::object(), "const"));
    CHECK(unknown.status == kExitConfig);
    CHECK(unknown.err.find("unknown") != std::string::npos);
    CHECK(unknown.err.find("foo") != std::string::npos);

    auto bad_n = exec(comp_config("bernoulli", {{"N", 0}}, "const"));
    CHECK(bad_n.status == kExitConfig);
    auto bad_luck = exec(comp_config("exponential", {{"N", 1}}, "box:1"));
    CHECK(bad_luck.status == kExitConfig);

    TempDir tmp;
    RunConfig nml = comp_config("exponential", {{"N", 1}}, "const");
    nml.command = "nml";
    nml.data = tmp.file("x.csv", "1.0\n");
    auto infinite = exec(nml);
    CHECK(infinite.status == kExitComputation);
    CHECK(infinite.err.find("infinite") != std::string::npos);

    RunConfig missing = nml;
    missing.data = tmp.file("absent.csv");
    CHECK(exec(missing).status == kExitConfig);

    RunConfig unknown_case;
    unknown_case.command = "verify";
    unknown_case.verify_case = "no-such-case";
    CHECK(exec(unknown_case).status == kExitConfig);
}

TEST_CASE("discrete comp report")
{
    const auto o = exec(comp_config("bernoulli", {{"N", 2}}, "const"));
    REQUIRE(o.status == kExitOk);
    const json r = report_of(o);
    CHECK(r["command"] == "comp");
    CHECK(r["config"]["models"][0]["id"] == "bernoulli");
    const auto& res = r["result"];
    CHECK(res["kind"] == "discrete");
    for (const char* m : {"brute", "pushforward", "sufficient_stat"})
        CHECK(res["methods"][m].get<double>() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(res["max_discrepancy"].get<double>() <= 1e-12);
}

TEST_CASE("continuous comp report")
{
    const auto o = exec(comp_config("exponential", {{"N", 1}}, "box:1,2.718281828459045"));
    REQUIRE(o.status == kExitOk);
    const auto res = report_of(o)["result"];
    CHECK(res["kind"] == "continuous");
    CHECK(res["methods"]["gfunction"]["value"].get<double>() == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(res["methods"]["brute"]["value"].get<double>() == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
    CHECK(res["cross_check_residual"].get<double>() <= 1e-8);
    CHECK(res["divergent"] == false);
}

TEST_CASE("divergent comp is reported as the string inf")
{
    const auto o = exec(comp_config("exponential", {{"N", 1}}, "const"));
    REQUIRE(o.status == kExitOk);
    const json r = report_of(o);
    CHECK(r["result"]["divergent"] == true);
    CHECK(r["result"]["methods"]["gfunction"]["value"] == "inf");
    CHECK(r["result"]["diagnostic"].is_string());
    CHECK(o.out.find("NaN") == std::string::npos);
    CHECK(o.out.find("null") == std::string::npos);
}

TEST_CASE("reports are byte-identical across runs")
{
    TempDir tmp;
    auto c = comp_config("exponential", {{"N", 2}}, "box:1,3");
    c.method = "brute";
    c.quadrature.method = "qmc";
    c.quadrature.budget = 1 << 14;
    c.box = std::vector<Interval>{{0.0, 40.0}, {0.0, 40.0}};
    c.output = tmp.file("a.json");
    REQUIRE(exec(c).status == kExitOk);
    c.output = tmp.file("b.json");
    REQUIRE(exec(c).status == kExitOk);
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string a = slurp(tmp.file("a.json"));
    CHECK(!a.empty());
    CHECK(a.find("\"output\"") != std::string::npos);
    // Only the output path differs between the two configs.
    std::string b = slurp(tmp.file("b.json"));
    const auto pos = b.find("b.json");
    REQUIRE(pos != std::string::npos);
    b.replace(pos, 6, "a.json");
    CHECK(a == b);
}

TEST_CASE("nml over a data file")
{
    TempDir tmp;
    RunConfig c;
    c.command = "nml";
    c.models.push_back({"exponential-clamped", {{"N", 1}, {"clamp", {1.0, 2.718281828459045}}}, std::nullopt});
    c.data = tmp.file("x.csv", "# observations\n1.0\n\n2.0\n");
    c.output = "-";
    const auto o = exec(c);
    REQUIRE(o.status == kExitOk);
    const auto rows = report_of(o)["result"]["rows"];
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["l_nml"].get<double>() == doctest::Approx(1.31326).epsilon(1e-5));
    CHECK(rows[1]["row"] == 2);

    RunConfig bad = c;
    bad.data = tmp.file("bad.csv", "1.0\nabc\n");
    const auto e = exec(bad);
    CHECK(e.status == kExitConfig);
    CHECK(e.err.find("bad.csv:2") != std::string::npos);
}

TEST_CASE("select over a data file")
{
    TempDir tmp;
    RunConfig c;
    c.command = "select";
    c.models.push_back({"exponential", {{"N", 3}}, "box:0.5,5"});
    c.models.push_back({"gauss-mean", {{"N", 3}}, "box:-5,5"});
    c.method = "gfunction";
    c.data = tmp.file("x.csv", "0.1,3.0,0.4\n");
    c.output = "-";
    const auto o = exec(c);
    REQUIRE(o.status == kExitOk);
    const auto row = report_of(o)["result"]["rows"][0];
    CHECK(row["selected"] == 0);
    CHECK(row["selected_model"] == "exponential");
}

TEST_CASE("g-function curves")
{
    TempDir tmp;
    auto c = comp_config("exponential", {{"N", 2}}, "box:1,3");
    c.method = "gfunction";
    c.curves = tmp.file("g.csv");
    c.output.reset();
    REQUIRE(exec(c).status == kExitOk);
    std::ifstream in(*c.curves);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "theta,g");
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        const double theta = std::stod(line.substr(0, comma));
        const double g = std::stod(line.substr(comma + 1));
        CHECK(theta > 1.0);
        CHECK(theta < 3.0);
        CHECK(g == doctest::Approx(4.0 * std::exp(-2.0) / theta).epsilon(1e-10));
        ++n;
    }
    CHECK(n == 256);
}

TEST_CASE("verify and list-models")
{
    RunConfig v;
    v.command = "verify";
    v.verify_case = "ellipse";
    v.output = "-";
    const auto o = exec(v);
    CHECK(o.status == kExitOk);
    CHECK(report_of(o)["result"]["passed"] == true);

    RunConfig naive = v;
    naive.verify_case = "naive-ellipse";
    const auto n = exec(naive);
    CHECK(n.status == kExitOk);

    RunConfig l;
    l.command = "list-models";
    l.output = "-";
    const auto lo = exec(l);
    CHECK(lo.status == kExitOk);
    CHECK(report_of(lo)["result"]["models"].size() >= 7);
}
