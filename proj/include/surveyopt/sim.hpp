#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "surveyopt/data.hpp"
#include "surveyopt/selection.hpp"

namespace surveyopt {

// Coefficient templates for the synthetic designs. scale shifts every
// coefficient away from its base value by half a template step:
// gamma_j = base_j + 0.5 * sign(base_j) * scale * template_j, sign(0) = +1.
//  - "lin-sparse": template_j = 3 - 2(j-1)/5 for j <= 5, else 0
//  - "lin-exp":    lin-sparse head, exp(-j) tail
//  - "exp":        template_j = 10 * exp(-j)
Eigen::VectorXd make_gamma(const std::string& spec, double scale, const Eigen::VectorXd& base_gamma);

struct SimConfig {
    std::string spec = "lin-sparse";
    double scale = 0;                   // template multiplier (kappa above)
    Eigen::VectorXd base_gamma;         // length M
    double beta_true = 0.18656;         // treatment effect in the experiment stage
    double sigma_eps = 1.0;             // regression error sd
    int n_pre = 0;                      // pre-sample rows
    std::string covariate_source = "gaussian";  // "gaussian" | "resample"
    const PreSample* donor = nullptr;   // rows resampled when source == "resample"
    SizeGrid grid;
    int replications = 0;
    std::uint64_t seed = 0;
    bool compute_eqb = true;
    bool experiment_row = true;
    int experiment_n = 0;               // 0: use n_pre
    int threads = 1;
};

// Draws one pre-experimental sample: covariates iid standard normal or rows
// resampled from the donor, outcome y = gamma'x + eps. Deterministic in
// (config, seed, replication index).
PreSample simulate_pre(const SimConfig& config, const Eigen::VectorXd& gamma,
                       std::uint64_t replication);

struct McRow {
    double scale = 0;
    std::string method;
    double n_hat = 0;
    double k_hat = 0;
    double cost_over_budget = 0;
    double rmse_criterion = 0;  // avg sqrt(criterion) of the chosen design
    double bias = 0;            // avg(beta_hat) - beta_true
    double sd = 0;              // sd of beta_hat across replications
    double rmse_beta = 0;
    double eqb = 0;             // avg equivalent budget (NaN when disabled)
};

// Full Monte Carlo: per replication, draw a pre-sample, run each selector,
// then draw an experiment of the chosen size (iid Bernoulli(1/2) treatment)
// and estimate the effect by OLS of y on (1, D, selected covariates).
// Averages arrive in replication order regardless of thread count. The
// optional experiment row fields the full selection at experiment_n.
std::vector<McRow> run_mc(const SimConfig& config, const CostModel& model, double budget);

}  // namespace surveyopt
