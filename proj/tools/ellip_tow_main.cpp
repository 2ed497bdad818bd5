#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "elliptow/bench.hpp"
#include "elliptow/error.hpp"

namespace {

struct JobArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

int run_kind(const std::string& kind, const JobArgs& args) {
    nlohmann::json config;
    {
        std::ifstream is(args.config_path);
        if (!is) {
            std::cerr << "cannot open config file: " << args.config_path << "\n";
            return 2;
        }
        is >> config;
    }
    elliptow::JobResult job = elliptow::run_job(kind, std::move(config), args.seed);
    std::string out = args.out_dir.empty() ? "runs/" + kind : args.out_dir;
    elliptow::write_job(job, out);

    for (const auto& c : job.manifest["criteria"]) {
        if (c.contains("reported"))
            std::cout << "[INFO] " << c["name"].get<std::string>() << "\n";
        else
            std::cout << (c["passed"].get<bool>() ? "[PASS] " : "[FAIL] ")
                      << c["name"].get<std::string>() << "\n";
    }
    std::cout << "wrote " << out << "/manifest.json";
    for (const auto& o : job.manifest["outputs"]) std::cout << ", " << out << "/" << o.get<std::string>();
    std::cout << "\n";
    return job.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ellipsoid mean-value expansion, DPP grid solver and noisy Tug-of-War simulator"};
    app.require_subcommand(1);

    // params
    int n = 2;
    double p = 2.0;
    std::optional<double> gamma;
    std::optional<std::string> branch;
    auto* params_cmd = app.add_subcommand("params", "Resolve scaling factors and the feasible gamma range");
    params_cmd->add_option("--n", n, "dimension (>= 2)")->required();
    params_cmd->add_option("--p", p, "exponent in (1, inf)")->required();
    double gamma_val = 0.0;
    auto* gopt = params_cmd->add_option("--gamma", gamma_val, "stochastic radius factor");
    std::string branch_val;
    auto* bopt = params_cmd->add_option("--branch", branch_val,
                                        "AspectBelowOne | AspectAboveOne | DegenerateAspectZero");

    const std::vector<std::string> kinds = {"expansion-check", "solve-dpp", "simulate", "convergence",
                                            "annulus", "regularity", "crosscheck"};
    std::map<std::string, JobArgs> job_args;
    std::map<std::string, std::uint64_t> seed_raw;
    for (const auto& kind : kinds) {
        auto* cmd = app.add_subcommand(kind, "Run the " + kind + " experiment");
        auto& args = job_args[kind];
        cmd->add_option("--config", args.config_path, "run-config JSON file")->required();
        cmd->add_option("--out", args.out_dir, "output directory (default runs/<kind>)");
        auto* sopt = cmd->add_option("--seed", seed_raw[kind], "override the config seed");
        cmd->callback([&, kind, sopt] {
            if (sopt->count()) job_args[kind].seed = seed_raw[kind];
        });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (params_cmd->parsed()) {
            if (gopt->count()) gamma = gamma_val;
            if (bopt->count()) branch = branch_val;
            std::cout << elliptow::describe_params(n, p, gamma, branch).dump(2) << "\n";
            return 0;
        }
        for (const auto& kind : kinds)
            if (app.get_subcommand(kind)->parsed()) return run_kind(kind, job_args[kind]);
    } catch (const elliptow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
