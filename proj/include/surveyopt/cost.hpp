#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace surveyopt {

// Piecewise-constant nondecreasing-domain step function on (0, inf).
// Band k covers (cutoffs[k-1], cutoffs[k]] with value values[k]; the last
// band (cutoffs.back(), inf) keeps the last value. values.size() ==
// cutoffs.size() + 1.
struct StepFunction {
    std::vector<double> cutoffs;  // strictly increasing, may be empty
    std::vector<double> values;   // one more entry than cutoffs

    void validate() const;
    static StepFunction constant(double v) { return StepFunction{{}, {v}}; }
};

double step_lookup(const StepFunction& f, double x);

// A sample-size decision: either a flat count of individuals or a clustered
// layout (clusters x per_cluster). effective_n is what the estimator sees.
struct SizeChoice {
    int individuals = 0;  // > 0 for flat sizes
    int clusters = 0;     // > 0 together with per_cluster for clustered sizes
    int per_cluster = 0;

    bool is_clustered() const { return clusters > 0; }
    int effective_n() const { return is_clustered() ? clusters * per_cluster : individuals; }

    static SizeChoice Individuals(int n) { return SizeChoice{n, 0, 0}; }
    static SizeChoice Clusters(int c, int per) { return SizeChoice{0, c, per}; }

    void validate() const;
    bool operator==(const SizeChoice& o) const = default;
};

// Candidate sizes for the outer search, sorted by (effective n, clusters).
// Clustered product grids may contain several layouts with equal effective n;
// flat grids are strictly increasing.
struct SizeGrid {
    std::vector<SizeChoice> sizes;

    void validate() const;
    static SizeGrid individuals(int lo, int hi, int step);
    static SizeGrid clustered(int c_lo, int c_hi, int c_step, int per_lo, int per_hi, int per_step);
};

// ---------------------------------------------------------------------------
// Cost model variants
// ---------------------------------------------------------------------------

// c(S, n) = n * |S| * unit_price. No fixed or time components.
struct FlatCost {
    double unit_price = 1.0;
};

// Single-block field survey. T(S) = tau0 + sum_j tau[j] S_j is interview
// length; c = phi * T^alpha  (instrument development)
//        + kappa(n) * T      (enumerator training; kappa steps in n)
//        + n * (eta + p * T) (per-interview fixed cost and time price).
struct SurveyCost {
    double phi = 0, alpha = 1;
    StepFunction kappa;
    double eta = 0, p = 0;
    double tau0 = 0;
    std::vector<double> tau;  // one entry per covariate
};

// Clustered survey: enumerators are hired per cluster workload. With c
// clusters of n_c units, mu(c, n_c) = floor(lambda * c * mu_n(n_c)) gives the
// enumerator count; kappa steps in mu; every enumerator costs eta; interviews
// are c * n_c.
struct ClusteredCost {
    double phi = 0, alpha = 1;
    StepFunction kappa;  // argument: enumerator count
    double eta = 0, p = 0;
    double tau0 = 0;
    std::vector<double> tau;
    double lambda = 0;
    StepFunction mu_n;  // workload factor in n_c
};

// Two-block clustered survey: cheap questions (one respondent per cluster,
// e.g. staff interviews) and expensive ones (administered to every sampled
// unit). The outcome instrument always belongs to the high block (tau0 counts
// toward high time). Low-block fixed and per-interview costs are gated by
// whether any low covariate is selected at all.
struct BlockedCost {
    struct Block {
        double phi = 0, alpha = 1;
        StepFunction kappa;  // argument: enumerator count
        double eta = 0, p = 0;
        double lambda = 0;
        StepFunction mu_n = StepFunction::constant(1.0);
        // true: interviews run per sampled unit (c * n_c); false: once per
        // cluster (c).
        bool per_individual = false;
        std::vector<int> members;  // covariate indices in this block
    };

    Block low, high;
    double tau0 = 0;          // outcome instrument time, charged to high
    std::vector<double> tau;  // per covariate, whichever block it is in
};

struct CostModel {
    std::variant<FlatCost, SurveyCost, ClusteredCost, BlockedCost> v;

    // Number of covariates the model prices; -1 when any length fits (flat).
    int covariate_count() const;
    void validate() const;
};

struct SurveyTime {
    double total = 0;
    double low = 0;   // blocked models only
    double high = 0;  // blocked models only
};

// Interview time implied by a selection (selection[j] == covariate j
// collected). Flat models have no time dimension and report zeros.
SurveyTime survey_time(const CostModel& model, const std::vector<bool>& selection);

// Total data-collection cost of fielding `selection` at `size`. Nondecreasing
// in size and in selection whenever the model's step functions are
// nondecreasing.
double total_cost(const CostModel& model, const std::vector<bool>& selection, const SizeChoice& size);

// Largest grid size (by effective n, ties toward later grid order) whose cost
// at the given selection fits the budget. nullopt when none fits.
std::optional<SizeChoice> max_feasible_size(const CostModel& model, const std::vector<bool>& selection,
                                            double budget, const SizeGrid& grid);

// Builds a selection bitmask over the model's covariates from sample column
// indices, translating through cost_column_of when the sample is stacked.
std::vector<bool> selection_bits(const std::vector<int>& indices, int model_covariates,
                                 const std::vector<int>& cost_column_of = {});

// ---------------------------------------------------------------------------
// Calibrated presets and JSON round-trip
// ---------------------------------------------------------------------------

struct Preset {
    std::string name;
    CostModel model;
    double budget = 0;
    SizeGrid grid;
    std::string notes;
};

// Known presets: "daycare" (36-covariate single-block survey),
// "schoolgrants_baseline" (142 cheap covariates), "schoolgrants_followup"
// (140 cheap + 3 expensive covariates).
Preset preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json cost_model_to_json(const CostModel& model, double budget,
                                  const SizeGrid* grid = nullptr);
CostModel cost_model_from_json(const nlohmann::json& j, double* budget = nullptr,
                               SizeGrid* grid = nullptr);

}  // namespace surveyopt
