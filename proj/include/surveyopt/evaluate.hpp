#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "surveyopt/data.hpp"
#include "surveyopt/selection.hpp"

namespace surveyopt {

// Variance of the difference-in-means treatment estimator: sigma2 residual
// outcome variance, n sample size, dbar treated share.
double ate_mse(double sigma2, int n, double dbar);

struct PowerSpec {
    double beta = 0;     // effect size
    double sigma = 1;    // residual outcome standard deviation
    int n = 0;           // experimental sample size
    double dbar = 0.5;   // treated share
    double alpha = 0.05; // two-sided test level
};

// Exact power of the two-sided z-test: 1 + Phi(b - c) - Phi(b + c) with
// b = beta * sqrt(n * dbar * (1 - dbar)) / sigma and c the (1 - alpha/2)
// normal quantile. Equals alpha at beta = 0.
double power(const PowerSpec& spec);

// Dispatches to the selector for `method`.
DesignResult run_design(Method method, const PreSample& sample, const GroupSpec& groups,
                        const CostModel& model, double budget, const SizeGrid& grid,
                        int threads = 1);

struct EqbResult {
    double budget = 0;    // smallest budget achieving the target criterion
    double relative = 0;  // budget / reference_budget
    int iterations = 0;
};

// Equivalent-budget search: bisects the budget (up to cap_multiplier times
// the reference) for the smallest one whose optimized design reaches
// criterion <= target. Grid effects can make feasibility non-monotone, so the
// smallest feasible budget seen is tracked explicitly. Throws
// InfeasibleError when even the cap cannot reach the target.
EqbResult equivalent_budget(Method method, const PreSample& sample, const GroupSpec& groups,
                            const CostModel& model, const SizeGrid& grid, double target_criterion,
                            double reference_budget, double cap_multiplier = 10.0, int threads = 1);

// Shared bisection core (exposed for out-of-sample variants): finds the
// smallest b in (lo, hi] with feasible(b) true, tracking the best feasible
// probe. feasible(hi) must hold.
double bisect_smallest_feasible(const std::function<bool(double)>& feasible, double lo, double hi,
                                int max_iter, double rel_tol, int* iterations = nullptr);

struct FoldResult {
    int fold = 0;
    double budget = 0;  // training-fold budget (full selection at training n)
    double n_hat = 0;
    double k_hat = 0;
    double cost_over_budget = 0;
    double rmse = 0;  // out-of-sample sqrt(criterion)
    double eqb = std::numeric_limits<double>::quiet_NaN();
};

struct KfoldReport {
    Method method;
    int folds = 0;
    std::vector<FoldResult> per_fold;
    double avg_n = 0, avg_k = 0, avg_cost_over_budget = 0, avg_rmse = 0;
    double avg_eqb = std::numeric_limits<double>::quiet_NaN();
};

// Cross-validated evaluation: rows are shuffled (seeded) into `folds` folds;
// each fold's design is selected on the remaining folds with budget equal to
// the cost of the full selection at the training length, then scored on the
// held-out fold with the training coefficients. with_eqb additionally finds,
// per fold, the budget needed to match the held-out criterion of the
// full-selection benchmark at the training length.
KfoldReport kfold_evaluate(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                           const SizeGrid& grid, Method method, int folds, std::uint64_t seed,
                           int threads = 1, bool with_eqb = false);

struct RootResult {
    double k = 0;
    bool corner = false;  // no interior root; k is the better bracket end
};

// Root of sigma2(k)/k + sigma2'(k) = 0 on [k_lo, k_hi] by bisection
// (tolerance 1e-8 in k). The budget does not enter when every covariate has
// the same price; B is accepted to make that explicit in call sites.
RootResult analytic_k_uniform(const std::function<double(double)>& sigma2, double budget,
                              double k_lo, double k_hi);

// Root of 1/(F + k) + sigma2'(k)/sigma2(k) = 0: uniform prices plus a fixed
// per-interview cost F (both expressed in covariate-price units).
RootResult analytic_k_fixedcost(const std::function<double(double)>& sigma2, double fixed_cost,
                                double budget, double k_lo, double k_hi);

// First-order-condition audit for heterogeneous prices: covariates come in
// types with sorted per-variable prices and constant variance slopes
// d sigma2 / d k_r. For each type, checks marginal cost share against
// marginal variance reduction at the candidate allocation:
// (dc_r/dk_r) / total_cost == -slope_r / sigma2(candidate), within tol.
// sigma2(candidate) = sigma2_base + sum_r slope_r * k_r.
std::vector<bool> foc_check_heterogeneous(const std::vector<std::vector<double>>& prices_by_type,
                                          const std::vector<double>& sigma2_slopes,
                                          double sigma2_base, const std::vector<double>& allocation,
                                          double tol = 1e-6);

struct DesignReport {
    std::string method;
    Selection selection;
    double rmse = 0;
    double eqb = std::numeric_limits<double>::quiet_NaN();
    double relative_eqb = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace surveyopt
