#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyopt/data.hpp"
#include "surveyopt/evaluate.hpp"
#include "surveyopt/selection.hpp"
#include "surveyopt/sim.hpp"

namespace surveyopt {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to rerun a command and reproduce its outputs byte for
// byte: the command line shape, content hashes of input files, the resolved
// configuration, and the seed. Wall-clock timing is deliberately kept out of
// report files (it goes to the console) so reruns compare equal.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> input_hashes;  // path -> fnv1a-64 hex
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string version = kToolVersion;
};

nlohmann::json manifest_to_json(const RunManifest& m);

// FNV-1a 64-bit content hash, hex encoded. Used for manifest input stamps.
std::string fnv1a_hex(const std::string& bytes);
std::string hash_file(const std::string& path);

nlohmann::json selection_to_json(const Selection& sel, const PreSample& sample, double budget);
nlohmann::json design_report_to_json(const std::vector<DesignReport>& reports,
                                     const PreSample& sample, double budget,
                                     const RunManifest& manifest);
std::string design_comparison_csv(const std::vector<DesignReport>& reports);
std::string mc_rows_csv(const std::vector<McRow>& rows);
nlohmann::json kfold_report_to_json(const KfoldReport& report, const RunManifest& manifest);

// Renders a compact aligned table of per-method results for the console.
std::string design_comparison_table(const std::vector<DesignReport>& reports);

// Serializes JSON deterministically (2-space indent, sorted keys, '\n'
// terminated) so byte-identical reproduction is well defined.
std::string render_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace surveyopt
