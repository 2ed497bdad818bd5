#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "elliptow/registry.hpp"

namespace elliptow {

/// A finished experiment: manifest (resolved config + seed + results +
/// pass/fail criteria) plus named CSV tables. Timing never enters the
/// artifacts, so a re-run from the manifest reproduces them byte for byte.
struct JobResult {
    nlohmann::json manifest;
    std::map<std::string, std::string> csv_files;
    bool all_passed = true;
};

/// Experiment kinds: expansion-check | solve-dpp | simulate | convergence |
/// annulus | regularity | crosscheck. The returned manifest embeds the fully
/// resolved config; running the same kind on that config reproduces every
/// number bit for bit.
JobResult run_job(const std::string& kind, nlohmann::json config,
                  std::optional<std::uint64_t> seed_override = std::nullopt);

/// Writes manifest.json and the CSV tables into out_dir (created if needed).
/// Files are staged with a .tmp suffix and renamed, one job at a time.
void write_job(const JobResult& job, const std::string& out_dir);

/// Round-trip-exact formatting used by every CSV writer.
std::string format_double(double v);

/// The `params` subcommand payload: resolved Params plus the feasible
/// gamma interval for the branch.
nlohmann::json describe_params(int n, double p, std::optional<double> gamma,
                               std::optional<std::string> branch);

}  // namespace elliptow
