#include "nmlc/cli.hpp"
#include "nmlc/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

struct Flags {
    std::string config;
    std::string model;
    int n = 0;
    int m = 0;
    std::string clamp;
    std::string luckiness;
    std::string method;
    std::string source;
    std::string quad_method;
    std::size_t resolution = 0;
    double tolerance = 0.0;
    std::size_t budget = 0;
    std::size_t replicates = 0;
    std::string box;
    double base = 0.0;
    std::string data;
    std::string output;
    std::string curves;
    std::string verify_case;
    std::uint64_t seed = 1;
};

std::vector<double> split_numbers(const std::string& text, char sep, const std::string& what)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, sep)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw nmlc::Error(nmlc::ErrorCode::invalid_argument, what + ": not a number: '" + cell + "'");
        }
    }
    return out;
}

void add_common(CLI::App* cmd, Flags& f, bool models)
{
    cmd->add_option("--config", f.config, "JSON run configuration; flags override its fields");
    cmd->add_option("--output", f.output, "JSON report path ('-' for stdout)");
    cmd->add_option("--seed", f.seed, "seed for samplers and QMC shifts");
    if (!models) return;
    cmd->add_option("--model", f.model, "zoo model id");
    cmd->add_option("--N", f.n, "sample size N");
    cmd->add_option("--m", f.m, "alphabet size (multinomial)");
    cmd->add_option("--clamp", f.clamp, "clamp interval lo,hi (exponential-clamped)");
    cmd->add_option("--luckiness", f.luckiness, "const or box:lo,hi[;lo,hi...]");
    cmd->add_option("--method", f.method, "computation route");
    cmd->add_option("--source", f.source, "estimator density source: closed-form or coarea-chart");
    cmd->add_option("--quad-method", f.quad_method, "data quadrature: grid, adaptive or qmc");
    cmd->add_option("--resolution", f.resolution, "grid points per axis");
    cmd->add_option("--tolerance", f.tolerance, "absolute and relative quadrature tolerance");
    cmd->add_option("--budget", f.budget, "QMC node budget");
    cmd->add_option("--replicates", f.replicates, "QMC random shifts");
    cmd->add_option("--box", f.box, "brute-force data box lo,hi[;lo,hi...]");
    cmd->add_option("--base", f.base, "logarithm base");
    cmd->add_option("--data", f.data, "CSV data file, one point per row");
}

nmlc::RunConfig build_config(const std::string& command, const CLI::App& cmd, const Flags& f)
{
    nmlc::RunConfig c;
    if (cmd.count("--config")) {
        std::ifstream in(f.config);
        if (!in) throw nmlc::Error(nmlc::ErrorCode::invalid_argument, "cannot read config file " + f.config);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw nmlc::Error(nmlc::ErrorCode::invalid_argument, f.config + ": " + e.what());
        }
        c = nmlc::config_from_json(j);
    }
    c.command = command;
    auto has = [&](const char* name) { return cmd.get_option_no_throw(name) && cmd.count(name) > 0; };

    if (has("--model")) {
        if (c.models.empty()) c.models.emplace_back();
        c.models.front().id = f.model;
    }
    auto params = [&]() -> json& {
        if (c.models.empty())
            throw nmlc::Error(nmlc::ErrorCode::invalid_argument, "model parameters given without --model");
        return c.models.front().params;
    };
    if (has("--N")) params()["N"] = f.n;
    if (has("--m")) params()["m"] = f.m;
    if (has("--clamp")) {
        const auto v = split_numbers(f.clamp, ',', "--clamp");
        params()["clamp"] = v;
    }
    if (has("--luckiness")) c.luckiness = f.luckiness;
    if (has("--method")) c.method = f.method;
    if (has("--source")) c.source = f.source;
    if (has("--quad-method")) c.quadrature.method = f.quad_method;
    if (has("--resolution")) c.quadrature.resolution = f.resolution;
    if (has("--tolerance")) c.quadrature.tolerance = f.tolerance;
    if (has("--budget")) c.quadrature.budget = f.budget;
    if (has("--replicates")) c.quadrature.replicates = f.replicates;
    if (has("--box")) {
        std::vector<nmlc::Interval> axes;
        std::stringstream in(f.box);
        std::string axis;
        while (std::getline(in, axis, ';')) {
            const auto v = split_numbers(axis, ',', "--box");
            if (v.size() != 2) throw nmlc::Error(nmlc::ErrorCode::invalid_argument, "--box axes need lo,hi");
            axes.push_back({v[0], v[1]});
        }
        c.box = axes;
    }
    if (has("--base")) c.base = f.base;
    if (has("--data")) c.data = f.data;
    if (has("--output")) c.output = f.output;
    if (has("--emit-curves")) c.curves = f.curves;
    if (has("--case")) c.verify_case = f.verify_case;
    if (has("--seed")) c.seed = f.seed;
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Model complexity and NML code lengths"};
    app.require_subcommand(1);
    Flags f;

    auto* comp = app.add_subcommand("comp", "compute the (luckiness) model complexity");
    add_common(comp, f, true);
    comp->add_option("--emit-curves", f.curves, "CSV of (theta, diagonal g-function)");
    auto* nml = app.add_subcommand("nml", "NML code lengths of the rows of a data file");
    add_common(nml, f, true);
    auto* select = app.add_subcommand("select", "pick the model with the shortest NML code length");
    add_common(select, f, true);
    auto* verify = app.add_subcommand("verify", "run coarea verification cases");
    add_common(verify, f, false);
    verify->add_option("--case", f.verify_case, "case id or 'all'");
    auto* list = app.add_subcommand("list-models", "print the model catalog");
    add_common(list, f, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return nmlc::kExitConfig;
    }

    const CLI::App* cmd = app.get_subcommands().front();
    nmlc::RunConfig config;
    try {
        config = build_config(cmd->get_name(), *cmd, f);
    } catch (const nmlc::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return nmlc::kExitConfig;
    }
    return nmlc::run(config, std::cout, std::cerr);
}
