#include "surveyopt/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace surveyopt {

using nlohmann::json;

namespace {

// Round-trip-exact float text for CSV cells.
std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash_file: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_hex(buf.str());
}

json manifest_to_json(const RunManifest& m) {
    json hashes = json::object();
    for (const auto& [path, hex] : m.input_hashes) hashes[path] = hex;
    return json{{"command", m.command},
                {"input_hashes", hashes},
                {"config", m.config},
                {"seed", m.seed},
                {"version", m.version}};
}

json selection_to_json(const Selection& sel, const PreSample& sample, double budget) {
    json j;
    j["n"] = sel.size.effective_n();
    if (sel.size.is_clustered()) j["clusters"] = {sel.size.clusters, sel.size.per_cluster};
    json names = json::array();
    for (int idx : sel.selected_indices) names.push_back(sample.covariate_names.at(idx));
    j["selected"] = names;
    j["criterion"] = sel.criterion;
    j["rmse"] = std::sqrt(sel.criterion);
    j["cost"] = sel.cost;
    j["cost_over_budget"] = sel.cost_over_budget;
    j["budget"] = budget;
    json path = json::array();
    for (const auto& step : sel.path) {
        path.push_back(json{{"step", step.step}, {"group", step.group}, {"rss", step.rss}});
    }
    j["path"] = path;
    if (!std::isnan(sel.lambda)) {
        j["lambda"] = sel.lambda;
        j["bisection_iters"] = sel.bisection_iterations;
    }
    return j;
}

json design_report_to_json(const std::vector<DesignReport>& reports, const PreSample& sample,
                           double budget, const RunManifest& manifest) {
    json methods = json::array();
    for (const DesignReport& r : reports) {
        methods.push_back(json{{"method", r.method},
                               {"n", r.selection.size.effective_n()},
                               {"k", static_cast<int>(r.selection.selected_indices.size())},
                               {"cost_over_budget", r.selection.cost_over_budget},
                               {"rmse", r.rmse},
                               {"eqb", r.eqb},
                               {"relative_eqb", r.relative_eqb},
                               {"selection", selection_to_json(r.selection, sample, budget)}});
    }
    return json{{"budget", budget}, {"methods", methods}, {"manifest", manifest_to_json(manifest)}};
}

std::string design_comparison_csv(const std::vector<DesignReport>& reports) {
    std::string out = "method,n,k,cost_over_budget,rmse,eqb,relative_eqb\n";
    for (const DesignReport& r : reports) {
        out += r.method;
        out += ',' + std::to_string(r.selection.size.effective_n());
        out += ',' + std::to_string(r.selection.selected_indices.size());
        out += ',' + fmt17(r.selection.cost_over_budget);
        out += ',' + fmt17(r.rmse);
        out += ',' + fmt17(r.eqb);
        out += ',' + fmt17(r.relative_eqb);
        out += '\n';
    }
    return out;
}

std::string mc_rows_csv(const std::vector<McRow>& rows) {
    std::string out =
        "scale,method,n_hat,k_hat,cost_over_budget,rmse_criterion,bias,sd,rmse_beta,eqb\n";
    for (const McRow& r : rows) {
        out += fmt17(r.scale);
        out += ',' + r.method;
        out += ',' + fmt17(r.n_hat);
        out += ',' + fmt17(r.k_hat);
        out += ',' + fmt17(r.cost_over_budget);
        out += ',' + fmt17(r.rmse_criterion);
        out += ',' + fmt17(r.bias);
        out += ',' + fmt17(r.sd);
        out += ',' + fmt17(r.rmse_beta);
        out += ',' + fmt17(r.eqb);
        out += '\n';
    }
    return out;
}

json kfold_report_to_json(const KfoldReport& report, const RunManifest& manifest) {
    json folds = json::array();
    for (const FoldResult& f : report.per_fold) {
        folds.push_back(json{{"fold", f.fold},
                             {"budget", f.budget},
                             {"n", f.n_hat},
                             {"k", f.k_hat},
                             {"cost_over_budget", f.cost_over_budget},
                             {"rmse", f.rmse},
                             {"eqb", f.eqb}});
    }
    return json{{"method", method_name(report.method)},
                {"folds", report.folds},
                {"avg", json{{"n", report.avg_n},
                             {"k", report.avg_k},
                             {"cost_over_budget", report.avg_cost_over_budget},
                             {"rmse", report.avg_rmse},
                             {"eqb", report.avg_eqb}}},
                {"per_fold", folds},
                {"manifest", manifest_to_json(manifest)}};
}

std::string design_comparison_table(const std::vector<DesignReport>& reports) {
    std::string out = "method       n       k   cost/B     rmse          eqb   rel.eqb\n";
    for (const DesignReport& r : reports) {
        char line[160];
        std::snprintf(line, sizeof line, "%-10s %5d %7zu %8s %8s %12s %9s\n", r.method.c_str(),
                      r.selection.size.effective_n(), r.selection.selected_indices.size(),
                      fmt_fixed(r.selection.cost_over_budget, 4).c_str(),
                      fmt_fixed(r.rmse, 6).c_str(), fmt_fixed(r.eqb, 2).c_str(),
                      fmt_fixed(r.relative_eqb, 4).c_str());
        out += line;
    }
    return out;
}

std::string render_json(const json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out << contents;
    if (!out) throw std::runtime_error("write_text_file: write failed for " + path);
}

}  // namespace surveyopt
