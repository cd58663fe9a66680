// surveyopt: budget-constrained survey design optimization CLI.
//
// Subcommands: design, eqb, power, cost, simulate, evaluate. Machine output
// is JSON/CSV written under --out; stdout carries a human-readable summary.
// Exit codes: 0 success, 2 invalid flags or inputs, 3 infeasible budget or
// unachievable target.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "surveyopt/cost.hpp"
#include "surveyopt/data.hpp"
#include "surveyopt/evaluate.hpp"
#include "surveyopt/lasso.hpp"
#include "surveyopt/oga.hpp"
#include "surveyopt/parallel.hpp"
#include "surveyopt/regress.hpp"
#include "surveyopt/report.hpp"
#include "surveyopt/selection.hpp"
#include "surveyopt/sim.hpp"

namespace so = surveyopt;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int parse_int(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad " + what + " '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("bad " + what + " '" + s + "'");
    return v;
}

// "LO:HI:STEP" with integer parts, STEP > 0, LO <= HI.
void parse_range(const std::string& s, int* lo, int* hi, int* step) {
    auto parts = [&] {
        std::vector<std::string> p;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, ':')) p.push_back(item);
        return p;
    }();
    if (parts.size() != 3) {
        throw std::invalid_argument("bad range '" + s + "', expected LO:HI:STEP");
    }
    *lo = parse_int(parts[0], "range");
    *hi = parse_int(parts[1], "range");
    *step = parse_int(parts[2], "range");
    if (*step <= 0 || *lo > *hi) {
        throw std::invalid_argument("bad range '" + s + "': need STEP > 0 and LO <= HI");
    }
}

std::string dstr(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

// Options shared across data-driven subcommands. threads and out stay out of
// manifests so reruns compare byte-identical regardless of parallelism or
// destination.
struct CommonOpts {
    std::string data_path;
    std::string outcome_csv;
    std::string cost_spec;
    double budget_override = std::numeric_limits<double>::quiet_NaN();
    std::string grid_str, clusters_str, per_cluster_str;
    std::string method_csv = "oga,lasso,post-lasso";
    std::string force_csv;
    std::string groups_path;
    bool stack = false;
    std::uint64_t seed = 0;
    int threads = 0;  // 0: hardware parallelism
    std::string out_dir = ".";
};

void add_cost_flags(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--cost", o.cost_spec, "cost model: preset name or JSON file");
    sub->add_option("--budget", o.budget_override, "budget (overrides the preset/file value)");
    sub->add_option("--grid", o.grid_str, "individual sample sizes LO:HI:STEP");
    sub->add_option("--clusters", o.clusters_str, "cluster counts LO:HI:STEP");
    sub->add_option("--per-cluster", o.per_cluster_str, "cluster sizes LO:HI:STEP");
}

void add_run_flags(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--threads", o.threads, "worker threads (default: hardware)")
        ->envname("SURVEYOPT_THREADS");
    sub->add_option("--out", o.out_dir, "output directory for report files");
}

void add_data_flags(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--data", o.data_path, "CSV dataset (header row)")->required();
    sub->add_option("--outcome", o.outcome_csv, "outcome column name(s), comma separated")
        ->required();
    sub->add_option("--method", o.method_csv, "methods: oga|lasso|post-lasso, comma separated");
    sub->add_option("--force", o.force_csv, "covariates forced into every selection");
    sub->add_option("--groups", o.groups_path, "JSON file: array of covariate-name arrays");
    sub->add_flag("--stack", o.stack, "stack multiple outcomes into one selection problem");
}

struct CostBundle {
    so::CostModel model;
    double budget = 0;
    so::SizeGrid grid;
    std::string source;  // preset name or file path
    bool from_file = false;
    std::string notes;
};

CostBundle resolve_cost(const CommonOpts& o, bool allow_default) {
    CostBundle b;
    if (o.cost_spec.empty()) {
        if (!allow_default) throw std::invalid_argument("--cost is required");
        b.model.v = so::FlatCost{1.0};
        b.budget = 2000.0;
        b.grid = so::SizeGrid::individuals(100, 2000, 50);
        b.source = "flat";
    } else {
        auto names = so::preset_names();
        if (std::find(names.begin(), names.end(), o.cost_spec) != names.end()) {
            so::Preset p = so::preset(o.cost_spec);
            b.model = p.model;
            b.budget = p.budget;
            b.grid = p.grid;
            b.source = o.cost_spec;
            b.notes = p.notes;
        } else {
            std::ifstream in(o.cost_spec);
            if (!in) {
                throw std::invalid_argument("--cost '" + o.cost_spec +
                                            "' is neither a preset (" + join(names, ", ") +
                                            ") nor a readable file");
            }
            json j = json::parse(in);
            b.model = so::cost_model_from_json(j, &b.budget, &b.grid);
            b.source = o.cost_spec;
            b.from_file = true;
        }
    }
    if (!std::isnan(o.budget_override)) b.budget = o.budget_override;
    if (!o.grid_str.empty()) {
        int lo, hi, step;
        parse_range(o.grid_str, &lo, &hi, &step);
        b.grid = so::SizeGrid::individuals(lo, hi, step);
    }
    if (!o.clusters_str.empty() || !o.per_cluster_str.empty()) {
        if (o.clusters_str.empty() || o.per_cluster_str.empty()) {
            throw std::invalid_argument("--clusters and --per-cluster must be given together");
        }
        int clo, chi, cstep, plo, phi, pstep;
        parse_range(o.clusters_str, &clo, &chi, &cstep);
        parse_range(o.per_cluster_str, &plo, &phi, &pstep);
        b.grid = so::SizeGrid::clustered(clo, chi, cstep, plo, phi, pstep);
    }
    if (b.grid.sizes.empty()) {
        throw std::invalid_argument(
            "no size grid: give --grid or --clusters/--per-cluster, or use a preset/file that "
            "carries one");
    }
    if (!(b.budget > 0)) {
        throw std::invalid_argument("no budget: give --budget or use a preset/file that carries one");
    }
    b.model.validate();
    b.grid.validate();
    return b;
}

int name_index(const so::PreSample& sample, const std::string& name) {
    for (int j = 0; j < sample.m(); ++j) {
        if (sample.covariate_names[j] == name) return j;
    }
    throw std::invalid_argument("unknown covariate '" + name + "'");
}

struct LoadedProblem {
    so::PreSample sample;  // studentized, stacked when requested
    so::GroupSpec groups;
    int raw_n = 0;  // dataset rows before stacking
    std::vector<std::string> outcome_names;
    std::vector<std::string> force_names;
    std::vector<so::Method> methods;
};

LoadedProblem load_problem(const CommonOpts& o, const CostBundle& cost) {
    LoadedProblem p;
    p.outcome_names = split_list(o.outcome_csv);
    if (p.outcome_names.empty()) throw std::invalid_argument("--outcome names missing");
    for (const auto& name : split_list(o.method_csv)) {
        p.methods.push_back(so::method_from_name(name));
    }
    if (p.methods.empty()) throw std::invalid_argument("--method list is empty");

    so::LoadResult loaded = so::load_csv(o.data_path, p.outcome_names);
    if (!loaded.report.dropped_rows.empty()) {
        std::cerr << "note: dropped " << loaded.report.dropped_rows.size()
                  << " incomplete row(s)\n";
    }
    if (!loaded.report.dropped_columns.empty()) {
        std::cerr << "note: dropped zero-variance column(s): "
                  << join(loaded.report.dropped_columns, ", ") << "\n";
    }
    so::PreSample raw = std::move(loaded.sample);
    p.raw_n = raw.n();

    int priced = cost.model.covariate_count();
    if (priced >= 0 && priced != raw.m()) {
        throw std::invalid_argument("cost model prices " + std::to_string(priced) +
                                    " covariates but the data has " + std::to_string(raw.m()));
    }

    p.force_names = split_list(o.force_csv);
    std::vector<int> forced;
    for (const auto& name : p.force_names) forced.push_back(name_index(raw, name));

    std::optional<std::vector<std::vector<int>>> grouping;
    if (!o.groups_path.empty()) {
        std::ifstream in(o.groups_path);
        if (!in) throw std::invalid_argument("cannot read --groups file '" + o.groups_path + "'");
        json j = json::parse(in);
        if (!j.is_array()) {
            throw std::invalid_argument("--groups file must be a JSON array of name arrays");
        }
        std::vector<std::vector<int>> gs;
        for (const auto& names : j) {
            std::vector<int> idx;
            for (const auto& nm : names) idx.push_back(name_index(raw, nm.get<std::string>()));
            gs.push_back(std::move(idx));
        }
        grouping = std::move(gs);
    }
    so::GroupSpec groups = so::define_groups(raw, grouping, forced);

    so::PreSample std_sample = so::studentize(raw);
    if (o.stack) {
        auto [stacked, stacked_groups] = so::stack_multivariate(std_sample, groups);
        p.sample = std::move(stacked);
        p.groups = std::move(stacked_groups);
    } else {
        if (std_sample.l() != 1) {
            throw std::invalid_argument("multiple outcomes require --stack");
        }
        p.sample = std::move(std_sample);
        p.groups = std::move(groups);
    }
    p.sample.validate();
    p.groups.validate(p.sample.m());
    return p;
}

// Number of covariates the cost model prices, inferred from the sample when
// the model accepts any length (flat).
int priced_covariates(const so::CostModel& model, const so::PreSample& sample) {
    int mc = model.covariate_count();
    if (mc >= 0) return mc;
    if (sample.cost_column_of.empty()) return sample.m();
    int mx = -1;
    for (int c : sample.cost_column_of) mx = std::max(mx, c);
    return mx + 1;
}

std::vector<int> all_indices(int m) {
    std::vector<int> idx(m);
    for (int j = 0; j < m; ++j) idx[j] = j;
    return idx;
}

so::RunManifest make_manifest(const std::string& command, const CommonOpts& o,
                              const CostBundle& cost, json config) {
    so::RunManifest m;
    m.command = command;
    m.seed = o.seed;
    if (!o.data_path.empty()) m.input_hashes[o.data_path] = so::hash_file(o.data_path);
    if (!o.groups_path.empty()) m.input_hashes[o.groups_path] = so::hash_file(o.groups_path);
    if (cost.from_file) m.input_hashes[cost.source] = so::hash_file(cost.source);
    m.config = std::move(config);
    return m;
}

json base_config(const CommonOpts& o, const CostBundle& cost, const LoadedProblem* p) {
    json c;
    if (!o.data_path.empty()) c["data"] = o.data_path;
    if (p) {
        c["outcome"] = p->outcome_names;
        json methods = json::array();
        for (auto m : p->methods) methods.push_back(so::method_name(m));
        c["methods"] = methods;
        if (!p->force_names.empty()) c["force"] = p->force_names;
        if (o.stack) c["stack"] = true;
        if (!o.groups_path.empty()) c["groups_file"] = o.groups_path;
    }
    c["cost_source"] = cost.source;
    c["cost"] = so::cost_model_to_json(cost.model, cost.budget, &cost.grid);
    return c;
}

// Canonical command string for manifests: resolved flags in fixed order,
// excluding --threads and --out.
std::string base_command(const std::string& sub, const CommonOpts& o, const CostBundle& cost,
                         const LoadedProblem* p) {
    std::string cmd = "surveyopt " + sub;
    if (!o.data_path.empty()) cmd += " --data " + o.data_path;
    if (p && !p->outcome_names.empty()) cmd += " --outcome " + join(p->outcome_names, ",");
    cmd += " --cost " + cost.source;
    cmd += " --budget " + dstr(cost.budget);
    if (!o.grid_str.empty()) cmd += " --grid " + o.grid_str;
    if (!o.clusters_str.empty()) {
        cmd += " --clusters " + o.clusters_str + " --per-cluster " + o.per_cluster_str;
    }
    if (p) {
        std::vector<std::string> names;
        for (auto m : p->methods) names.push_back(so::method_name(m));
        cmd += " --method " + join(names, ",");
        if (!p->force_names.empty()) cmd += " --force " + join(p->force_names, ",");
        if (!o.groups_path.empty()) cmd += " --groups " + o.groups_path;
        if (o.stack) cmd += " --stack";
    }
    cmd += " --seed " + std::to_string(o.seed);
    return cmd;
}

std::filesystem::path ensure_outdir(const std::string& dir) {
    std::filesystem::path path(dir.empty() ? "." : dir);
    std::filesystem::create_directories(path);
    return path;
}

void write_report(const std::filesystem::path& path, const std::string& contents) {
    so::write_text_file(path.string(), contents);
    std::cerr << "wrote " << path.string() << "\n";
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    ~Timer() {
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "elapsed: %.2f s\n", s);
    }
};

// --------------------------------------------------------------------------
// design
// --------------------------------------------------------------------------

struct DesignOpts {
    CommonOpts common;
    bool eqb = false;
    int experiment_n = 0;  // 0: dataset rows
};

void run_design_cmd(const DesignOpts& o) {
    Timer timer;
    CostBundle cost = resolve_cost(o.common, false);
    LoadedProblem p = load_problem(o.common, cost);
    int threads = so::resolve_threads(o.common.threads);

    int n_ref = o.experiment_n > 0 ? o.experiment_n : p.raw_n;
    double target = 0, ref_budget = 0;
    if (o.eqb) {
        double rv_full = so::residual_variance(p.sample, all_indices(p.sample.m()));
        target = rv_full / n_ref;
        auto bits = so::selection_bits(all_indices(p.sample.m()),
                                       priced_covariates(cost.model, p.sample),
                                       p.sample.cost_column_of);
        ref_budget = so::total_cost(cost.model, bits, so::SizeChoice::Individuals(n_ref));
    }

    json config = base_config(o.common, cost, &p);
    if (o.eqb) config["eqb"] = json{{"experiment_n", n_ref}};
    std::string cmd = base_command("design", o.common, cost, &p);
    if (o.eqb) cmd += " --eqb --experiment-n " + std::to_string(n_ref);
    so::RunManifest manifest = make_manifest(cmd, o.common, cost, std::move(config));

    std::vector<so::DesignReport> reports;
    for (auto method : p.methods) {
        so::DesignResult result =
            so::run_design(method, p.sample, p.groups, cost.model, cost.budget, cost.grid, threads);
        so::DesignReport rep;
        rep.method = so::method_name(method);
        rep.selection = result.best;
        rep.rmse = std::sqrt(result.best.criterion);
        if (o.eqb) {
            try {
                so::EqbResult e = so::equivalent_budget(method, p.sample, p.groups, cost.model,
                                                        cost.grid, target, ref_budget, 10.0, threads);
                rep.eqb = e.budget;
                rep.relative_eqb = e.relative;
            } catch (const so::InfeasibleError&) {
                // unreachable target for this method: leave the columns NaN
            }
        }
        reports.push_back(std::move(rep));
    }

    auto dir = ensure_outdir(o.common.out_dir);
    for (const auto& rep : reports) {
        json j;
        j["method"] = rep.method;
        j["selection"] = so::selection_to_json(rep.selection, p.sample, cost.budget);
        j["manifest"] = so::manifest_to_json(manifest);
        write_report(dir / ("design_" + rep.method + ".json"), so::render_json(j));
    }
    write_report(dir / "design_report.json",
                 so::render_json(so::design_report_to_json(reports, p.sample, cost.budget, manifest)));
    write_report(dir / "design_comparison.csv", so::design_comparison_csv(reports));
    std::cout << so::design_comparison_table(reports);
}

// --------------------------------------------------------------------------
// eqb
// --------------------------------------------------------------------------

struct EqbOpts {
    CommonOpts common;
    double target_rmse = std::numeric_limits<double>::quiet_NaN();
    int reference_n = 0;
};

void run_eqb_cmd(const EqbOpts& o) {
    Timer timer;
    if (std::isnan(o.target_rmse) && o.reference_n <= 0) {
        throw std::invalid_argument("eqb needs --target RMSE or --reference N");
    }
    CostBundle cost = resolve_cost(o.common, false);
    LoadedProblem p = load_problem(o.common, cost);
    int threads = so::resolve_threads(o.common.threads);

    double target = 0, ref_budget = 0;
    if (!std::isnan(o.target_rmse)) {
        if (!(o.target_rmse > 0)) throw std::invalid_argument("--target must be positive");
        target = o.target_rmse * o.target_rmse;
        ref_budget = cost.budget;
    } else {
        double rv_full = so::residual_variance(p.sample, all_indices(p.sample.m()));
        target = rv_full / o.reference_n;
        auto bits = so::selection_bits(all_indices(p.sample.m()),
                                       priced_covariates(cost.model, p.sample),
                                       p.sample.cost_column_of);
        ref_budget = so::total_cost(cost.model, bits, so::SizeChoice::Individuals(o.reference_n));
    }

    json config = base_config(o.common, cost, &p);
    config["target_criterion"] = target;
    config["reference_budget"] = ref_budget;
    if (o.reference_n > 0) config["reference_n"] = o.reference_n;
    std::string cmd = base_command("eqb", o.common, cost, &p);
    if (!std::isnan(o.target_rmse)) cmd += " --target " + dstr(o.target_rmse);
    if (o.reference_n > 0) cmd += " --reference " + std::to_string(o.reference_n);
    so::RunManifest manifest = make_manifest(cmd, o.common, cost, std::move(config));

    json methods = json::array();
    for (auto method : p.methods) {
        so::EqbResult e = so::equivalent_budget(method, p.sample, p.groups, cost.model, cost.grid,
                                                target, ref_budget, 10.0, threads);
        json row;
        row["method"] = so::method_name(method);
        row["eqb"] = e.budget;
        row["relative_eqb"] = e.relative;
        row["iterations"] = e.iterations;
        methods.push_back(row);
        std::printf("%-10s eqb %14.2f   relative %8.4f\n", so::method_name(method).c_str(),
                    e.budget, e.relative);
    }

    json j;
    j["budget"] = cost.budget;
    j["target_criterion"] = target;
    j["reference_budget"] = ref_budget;
    j["methods"] = methods;
    j["manifest"] = so::manifest_to_json(manifest);
    write_report(ensure_outdir(o.common.out_dir) / "eqb_report.json", so::render_json(j));
}

// --------------------------------------------------------------------------
// power
// --------------------------------------------------------------------------

struct PowerOpts {
    so::PowerSpec spec;
    std::string out_dir;  // empty: no file
};

void run_power_cmd(const PowerOpts& o) {
    double pw = so::power(o.spec);
    double mse = so::ate_mse(o.spec.sigma * o.spec.sigma, o.spec.n, o.spec.dbar);
    std::printf("power = %.6f\n", pw);
    if (!o.out_dir.empty()) {
        json j;
        j["beta"] = o.spec.beta;
        j["sigma"] = o.spec.sigma;
        j["n"] = o.spec.n;
        j["dbar"] = o.spec.dbar;
        j["alpha"] = o.spec.alpha;
        j["power"] = pw;
        j["ate_mse"] = mse;
        so::RunManifest m;
        m.command = "surveyopt power --beta " + dstr(o.spec.beta) + " --sigma " +
                    dstr(o.spec.sigma) + " --n " + std::to_string(o.spec.n) + " --dbar " +
                    dstr(o.spec.dbar) + " --alpha " + dstr(o.spec.alpha);
        m.config = json{{"beta", o.spec.beta}, {"sigma", o.spec.sigma}, {"n", o.spec.n},
                        {"dbar", o.spec.dbar}, {"alpha", o.spec.alpha}};
        j["manifest"] = so::manifest_to_json(m);
        write_report(ensure_outdir(o.out_dir) / "power.json", so::render_json(j));
    }
}

// --------------------------------------------------------------------------
// cost
// --------------------------------------------------------------------------

struct CostOpts {
    CommonOpts common;
    int eval_n = 0;  // 0: skip the point evaluation
};

void run_cost_cmd(const CostOpts& o) {
    Timer timer;
    CostBundle cost = resolve_cost(o.common, false);
    int mc = cost.model.covariate_count();
    auto empty_bits = so::selection_bits({}, mc);

    json j = so::cost_model_to_json(cost.model, cost.budget, &cost.grid);
    if (!cost.notes.empty()) j["notes"] = cost.notes;

    std::printf("budget: %.2f\n", cost.budget);
    std::printf("grid sizes: %zu\n", cost.grid.sizes.size());
    auto max_empty = so::max_feasible_size(cost.model, empty_bits, cost.budget, cost.grid);
    if (max_empty) {
        std::printf("max feasible n, no covariates: %d\n", max_empty->effective_n());
        json mj;
        mj["effective_n"] = max_empty->effective_n();
        if (max_empty->is_clustered()) {
            mj["clusters"] = max_empty->clusters;
            mj["per_cluster"] = max_empty->per_cluster;
        }
        j["max_feasible_empty"] = mj;
    } else {
        std::printf("max feasible n, no covariates: none (budget infeasible on this grid)\n");
        j["max_feasible_empty"] = nullptr;
    }
    if (o.eval_n > 0) {
        auto full_bits = empty_bits;
        if (mc >= 0) full_bits.assign(mc, true);
        double c_empty = so::total_cost(cost.model, empty_bits, so::SizeChoice::Individuals(o.eval_n));
        double c_full = so::total_cost(cost.model, full_bits, so::SizeChoice::Individuals(o.eval_n));
        std::printf("cost at n=%d: empty %.2f, full %.2f\n", o.eval_n, c_empty, c_full);
        j["evaluated"] = json{{"n", o.eval_n}, {"empty", c_empty}, {"full", c_full}};
    }

    std::string cmd = "surveyopt cost --cost " + cost.source + " --budget " + dstr(cost.budget);
    if (o.eval_n > 0) cmd += " --n " + std::to_string(o.eval_n);
    so::RunManifest manifest = make_manifest(cmd, o.common, cost, base_config(o.common, cost, nullptr));
    j["manifest"] = so::manifest_to_json(manifest);
    write_report(ensure_outdir(o.common.out_dir) / "model.json", so::render_json(j));
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

struct SimulateOpts {
    CommonOpts common;
    std::string spec = "lin-sparse";
    double kappa = 0;
    int reps = 200;
    int n_pre = 500;
    int m = 20;
    int n_exp = 0;
    double beta_true = 0.18656;
    double sigma_eps = 1.0;
    bool eqb = false;
    bool experiment_row = false;
};

void run_simulate_cmd(const SimulateOpts& o) {
    Timer timer;
    CostBundle cost = resolve_cost(o.common, true);

    so::SimConfig config;
    config.spec = o.spec;
    config.scale = o.kappa;
    config.base_gamma = Eigen::VectorXd::Zero(o.m);
    config.beta_true = o.beta_true;
    config.sigma_eps = o.sigma_eps;
    config.n_pre = o.n_pre;
    config.grid = cost.grid;
    config.replications = o.reps;
    config.seed = o.common.seed;
    config.compute_eqb = o.eqb;
    config.experiment_row = o.experiment_row;
    config.experiment_n = o.n_exp;
    config.threads = so::resolve_threads(o.common.threads);

    std::vector<so::McRow> rows = so::run_mc(config, cost.model, cost.budget);
    std::string csv = so::mc_rows_csv(rows);
    std::cout << csv;

    json cfg = base_config(o.common, cost, nullptr);
    cfg["spec"] = o.spec;
    cfg["kappa"] = o.kappa;
    cfg["reps"] = o.reps;
    cfg["n_pre"] = o.n_pre;
    cfg["m"] = o.m;
    cfg["n_exp"] = o.n_exp;
    cfg["beta_true"] = o.beta_true;
    cfg["sigma_eps"] = o.sigma_eps;
    cfg["eqb"] = o.eqb;
    cfg["experiment_row"] = o.experiment_row;
    std::string cmd = "surveyopt simulate --spec " + o.spec + " --kappa " + dstr(o.kappa) +
                      " --reps " + std::to_string(o.reps) + " --n-pre " + std::to_string(o.n_pre) +
                      " --m " + std::to_string(o.m);
    if (o.n_exp > 0) cmd += " --n-exp " + std::to_string(o.n_exp);
    cmd += " --beta-true " + dstr(o.beta_true) + " --sigma-eps " + dstr(o.sigma_eps);
    cmd += " --cost " + cost.source + " --budget " + dstr(cost.budget);
    if (!o.common.grid_str.empty()) cmd += " --grid " + o.common.grid_str;
    if (o.eqb) cmd += " --eqb";
    if (o.experiment_row) cmd += " --experiment-row";
    cmd += " --seed " + std::to_string(o.common.seed);
    so::RunManifest manifest = make_manifest(cmd, o.common, cost, std::move(cfg));

    auto dir = ensure_outdir(o.common.out_dir);
    write_report(dir / "mc.csv", csv);
    write_report(dir / "mc_manifest.json", so::render_json(so::manifest_to_json(manifest)));
}

// --------------------------------------------------------------------------
// evaluate (k-fold cross validation)
// --------------------------------------------------------------------------

struct EvaluateOpts {
    CommonOpts common;
    int folds = 5;
    bool eqb = false;
};

void run_evaluate_cmd(const EvaluateOpts& o) {
    Timer timer;
    if (o.folds < 2) throw std::invalid_argument("--folds must be at least 2");
    CostBundle cost = resolve_cost(o.common, false);
    LoadedProblem p = load_problem(o.common, cost);
    int threads = so::resolve_threads(o.common.threads);

    json config = base_config(o.common, cost, &p);
    config["folds"] = o.folds;
    config["eqb"] = o.eqb;
    std::string cmd = base_command("evaluate", o.common, cost, &p) + " --folds " +
                      std::to_string(o.folds);
    if (o.eqb) cmd += " --eqb";
    so::RunManifest manifest = make_manifest(cmd, o.common, cost, std::move(config));

    auto dir = ensure_outdir(o.common.out_dir);
    for (auto method : p.methods) {
        so::KfoldReport report = so::kfold_evaluate(p.sample, p.groups, cost.model, cost.grid,
                                                    method, o.folds, o.common.seed, threads, o.eqb);
        std::printf("%-10s folds %d  avg n %8.1f  avg k %6.2f  avg rmse %.6g",
                    so::method_name(method).c_str(), report.folds, report.avg_n, report.avg_k,
                    report.avg_rmse);
        if (o.eqb) std::printf("  avg eqb %.6g", report.avg_eqb);
        std::printf("\n");
        write_report(dir / ("kfold_" + so::method_name(method) + ".json"),
                     so::render_json(so::kfold_report_to_json(report, manifest)));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surveyopt: joint sample-size and covariate selection under a budget"};
    app.require_subcommand(1);

    DesignOpts design_opts;
    auto* design = app.add_subcommand(
        "design", "select sample size and covariates for each method, write reports");
    add_data_flags(design, design_opts.common);
    add_cost_flags(design, design_opts.common);
    add_run_flags(design, design_opts.common);
    design->add_flag("--eqb", design_opts.eqb, "also compute equivalent budgets");
    design->add_option("--experiment-n", design_opts.experiment_n,
                       "reference experiment size for --eqb (default: dataset rows)");
    design->callback([&] { run_design_cmd(design_opts); });

    EqbOpts eqb_opts;
    auto* eqb = app.add_subcommand(
        "eqb", "smallest budget matching a target RMSE or a reference design");
    add_data_flags(eqb, eqb_opts.common);
    add_cost_flags(eqb, eqb_opts.common);
    add_run_flags(eqb, eqb_opts.common);
    eqb->add_option("--target", eqb_opts.target_rmse, "target RMSE to match");
    eqb->add_option("--reference", eqb_opts.reference_n,
                    "reference: full selection at this experiment size");
    eqb->callback([&] { run_eqb_cmd(eqb_opts); });

    PowerOpts power_opts;
    auto* pow = app.add_subcommand("power", "two-sided z-test power for a design");
    pow->add_option("--beta", power_opts.spec.beta, "effect size");
    pow->add_option("--sigma", power_opts.spec.sigma, "residual outcome sd");
    pow->add_option("--n", power_opts.spec.n, "experimental sample size")->required();
    pow->add_option("--dbar", power_opts.spec.dbar, "treated share (default 0.5)");
    pow->add_option("--alpha", power_opts.spec.alpha, "test level (default 0.05)");
    pow->add_option("--out", power_opts.out_dir, "directory for power.json");
    pow->callback([&] { run_power_cmd(power_opts); });

    CostOpts cost_opts;
    auto* costc = app.add_subcommand("cost", "inspect a cost model and its budget");
    add_cost_flags(costc, cost_opts.common);
    add_run_flags(costc, cost_opts.common);
    costc->add_option("--n", cost_opts.eval_n, "also price empty and full selections at this n");
    costc->callback([&] { run_cost_cmd(cost_opts); });

    SimulateOpts sim_opts;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the selectors");
    sim->add_option("--spec", sim_opts.spec, "coefficient template: lin-sparse|lin-exp|exp");
    sim->add_option("--kappa", sim_opts.kappa, "template scale multiplier");
    sim->add_option("--reps", sim_opts.reps, "replications (default 200)");
    sim->add_option("--n-pre", sim_opts.n_pre, "pre-sample rows (default 500)");
    sim->add_option("--m", sim_opts.m, "candidate covariates (default 20)");
    sim->add_option("--n-exp", sim_opts.n_exp, "experiment-row size (default n-pre)");
    sim->add_option("--beta-true", sim_opts.beta_true, "true treatment effect");
    sim->add_option("--sigma-eps", sim_opts.sigma_eps, "regression error sd");
    sim->add_flag("--eqb", sim_opts.eqb, "compute equivalent budgets per replication");
    sim->add_flag("--experiment-row", sim_opts.experiment_row,
                  "add the full-selection experiment row");
    add_cost_flags(sim, sim_opts.common);
    add_run_flags(sim, sim_opts.common);
    sim->callback([&] { run_simulate_cmd(sim_opts); });

    EvaluateOpts eval_opts;
    auto* eval = app.add_subcommand("evaluate", "k-fold out-of-sample evaluation");
    add_data_flags(eval, eval_opts.common);
    add_cost_flags(eval, eval_opts.common);
    add_run_flags(eval, eval_opts.common);
    eval->add_option("--folds", eval_opts.folds, "number of folds (default 5)");
    eval->add_flag("--eqb", eval_opts.eqb, "per-fold equivalent budgets");
    eval->callback([&] { run_evaluate_cmd(eval_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const so::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
