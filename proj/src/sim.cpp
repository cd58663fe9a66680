#include "surveyopt/sim.hpp"

#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>

#include "surveyopt/evaluate.hpp"
#include "surveyopt/parallel.hpp"
#include "surveyopt/regress.hpp"
#include "surveyopt/rng.hpp"

namespace surveyopt {

namespace {

// Independent RNG streams per replication: one for the pre-sample, one per
// method's experiment draw, one for the benchmark experiment row.
constexpr std::uint64_t kStreamsPerRep = 8;

}  // namespace

Eigen::VectorXd make_gamma(const std::string& spec, double scale,
                           const Eigen::VectorXd& base_gamma) {
    const int m = static_cast<int>(base_gamma.size());
    if ((spec == "lin-sparse" || spec == "lin-exp") && m < 5) {
        throw std::invalid_argument("make_gamma: linear templates need at least 5 covariates");
    }
    Eigen::VectorXd tmpl = Eigen::VectorXd::Zero(m);
    for (int j = 1; j <= m; ++j) {
        double v = 0.0;
        if (spec == "lin-sparse") {
            v = j <= 5 ? 3.0 - 2.0 * (j - 1) / 5.0 : 0.0;
        } else if (spec == "lin-exp") {
            v = j <= 5 ? 3.0 - 2.0 * (j - 1) / 5.0 : std::exp(-j);
        } else if (spec == "exp") {
            v = 10.0 * std::exp(-j);
        } else {
            throw std::invalid_argument("make_gamma: unknown spec '" + spec + "'");
        }
        tmpl[j - 1] = v;
    }
    Eigen::VectorXd out(m);
    for (int j = 0; j < m; ++j) {
        const double sign = base_gamma[j] < 0 ? -1.0 : 1.0;
        out[j] = base_gamma[j] + 0.5 * sign * scale * tmpl[j];
    }
    return out;
}

namespace {

Eigen::MatrixXd draw_covariates(const SimConfig& config, int rows, int cols, Rng& rng) {
    Eigen::MatrixXd x(rows, cols);
    if (config.covariate_source == "gaussian") {
        std::normal_distribution<double> standard(0.0, 1.0);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) x(i, j) = standard(rng);
        }
    } else if (config.covariate_source == "resample") {
        if (!config.donor) {
            throw std::invalid_argument("simulate_pre: resample source needs a donor sample");
        }
        if (config.donor->m() != cols) {
            throw std::invalid_argument("simulate_pre: donor covariate count mismatch");
        }
        std::uniform_int_distribution<int> pick(0, config.donor->n() - 1);
        for (int i = 0; i < rows; ++i) x.row(i) = config.donor->covariates.row(pick(rng));
    } else {
        throw std::invalid_argument("simulate_pre: unknown covariate source '" +
                                    config.covariate_source + "'");
    }
    return x;
}

Eigen::VectorXd draw_noise(double sigma, int rows, Rng& rng) {
    Eigen::VectorXd eps = Eigen::VectorXd::Zero(rows);
    if (sigma > 0) {
        std::normal_distribution<double> noise(0.0, sigma);
        for (int i = 0; i < rows; ++i) eps[i] = noise(rng);
    }
    return eps;
}

}  // namespace

PreSample simulate_pre(const SimConfig& config, const Eigen::VectorXd& gamma,
                       std::uint64_t replication) {
    if (config.n_pre < 2) throw std::invalid_argument("simulate_pre: n_pre must be >= 2");
    const int m = static_cast<int>(gamma.size());
    Rng rng = make_rng(config.seed, replication);

    PreSample s;
    s.covariates = draw_covariates(config, config.n_pre, m, rng);
    s.outcomes = (s.covariates * gamma + draw_noise(config.sigma_eps, config.n_pre, rng)).eval();
    s.outcome_names = {"y"};
    s.covariate_names.reserve(m);
    for (int j = 1; j <= m; ++j) s.covariate_names.push_back("x" + std::to_string(j));
    s.column_scales.assign(m, 1.0);
    s.validate();
    return s;
}

namespace {

// One experiment draw: covariates from the configured source, iid coin-flip
// treatment, outcome beta*D + gamma'X + eps; returns the OLS coefficient on D
// controlling for the selected columns.
double experiment_beta(const SimConfig& config, const Eigen::VectorXd& gamma,
                       const std::vector<int>& indices, int n, Rng& rng) {
    const int m = static_cast<int>(gamma.size());
    const Eigen::MatrixXd x = draw_covariates(config, n, m, rng);
    Eigen::VectorXd d(n);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < n; ++i) d[i] = coin(rng) ? 1.0 : 0.0;
    const Eigen::VectorXd y =
        config.beta_true * d + x * gamma + draw_noise(config.sigma_eps, n, rng);

    Eigen::MatrixXd columns(n, 1 + static_cast<int>(indices.size()));
    columns.col(0) = d;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        columns.col(1 + static_cast<int>(i)) = x.col(indices[i]);
    }
    return ols(columns, y, true).coefficients[0];
}

struct RepOutcome {
    bool ok = false;
    // Slots 0..2: oga, lasso, post-lasso; slot 3: the benchmark experiment.
    std::array<double, 4> n{}, k{}, cob{}, rmse_crit{}, beta{}, eqb{};
};

RepOutcome one_replication(const SimConfig& config, const CostModel& model, double budget,
                           const Eigen::VectorXd& gamma, std::uint64_t rep, int n_exp) {
    static const std::array<Method, 3> kMethods = {Method::oga, Method::lasso, Method::post_lasso};
    RepOutcome out;
    const PreSample pre = simulate_pre(config, gamma, rep * kStreamsPerRep);
    const PreSample pre_std = studentize(pre);
    const GroupSpec groups = define_groups(pre_std, std::nullopt, {});

    std::vector<int> all(pre.m());
    std::iota(all.begin(), all.end(), 0);
    const double rv_full = residual_variance(pre, all);
    const double target_criterion = rv_full / n_exp;

    for (std::size_t mi = 0; mi < kMethods.size(); ++mi) {
        const DesignResult designed =
            run_design(kMethods[mi], pre_std, groups, model, budget, config.grid, 1);
        const Selection& best = designed.best;
        Rng erng = make_rng(config.seed, rep * kStreamsPerRep + 1 + mi);
        out.n[mi] = best.size.effective_n();
        out.k[mi] = static_cast<double>(best.selected_indices.size());
        out.cob[mi] = best.cost_over_budget;
        out.rmse_crit[mi] = std::sqrt(best.criterion);
        out.beta[mi] = experiment_beta(config, gamma, best.selected_indices,
                                       best.size.effective_n(), erng);
        if (config.compute_eqb) {
            out.eqb[mi] = equivalent_budget(kMethods[mi], pre_std, groups, model, config.grid,
                                            target_criterion, budget, 10.0, 1)
                              .budget;
        }
    }

    if (config.experiment_row) {
        const int mc = model.covariate_count();
        const double cost_full =
            total_cost(model, selection_bits(all, mc, pre.cost_column_of),
                       SizeChoice::Individuals(n_exp));
        Rng erng = make_rng(config.seed, rep * kStreamsPerRep + 4);
        out.n[3] = n_exp;
        out.k[3] = static_cast<double>(all.size());
        out.cob[3] = cost_full / budget;
        out.rmse_crit[3] = std::sqrt(target_criterion);
        out.beta[3] = experiment_beta(config, gamma, all, n_exp, erng);
        // The benchmark's own spending is, by definition, the budget that
        // reproduces its precision.
        out.eqb[3] = cost_full;
    }
    out.ok = true;
    return out;
}

}  // namespace

std::vector<McRow> run_mc(const SimConfig& config, const CostModel& model, double budget) {
    if (config.replications < 1) throw std::invalid_argument("run_mc: replications must be >= 1");
    config.grid.validate();
    const Eigen::VectorXd gamma = make_gamma(config.spec, config.scale, config.base_gamma);
    const int n_exp = config.experiment_n > 0 ? config.experiment_n : config.n_pre;

    const int reps = config.replications;
    std::vector<RepOutcome> slots(reps);
    parallel_for(static_cast<std::size_t>(reps), config.threads, [&](std::size_t rep) {
        try {
            slots[rep] = one_replication(config, model, budget, gamma,
                                         static_cast<std::uint64_t>(rep), n_exp);
        } catch (const std::exception&) {
            slots[rep].ok = false;
        }
    });

    int used = 0;
    for (const RepOutcome& r : slots) used += r.ok ? 1 : 0;
    if (used == 0) throw std::runtime_error("run_mc: every replication failed");
    if (used < reps) {
        std::cerr << "run_mc: " << (reps - used) << " of " << reps
                  << " replications failed and were excluded\n";
    }

    const int row_count = config.experiment_row ? 4 : 3;
    static const std::array<const char*, 4> kNames = {"oga", "lasso", "post-lasso", "experiment"};
    std::vector<McRow> rows;
    for (int s = 0; s < row_count; ++s) {
        McRow row;
        row.scale = config.scale;
        row.method = kNames[s];
        double beta_sum = 0, beta_sq = 0;
        double n_sum = 0, k_sum = 0, cob_sum = 0, crit_sum = 0, eqb_sum = 0;
        for (const RepOutcome& r : slots) {
            if (!r.ok) continue;
            n_sum += r.n[s];
            k_sum += r.k[s];
            cob_sum += r.cob[s];
            crit_sum += r.rmse_crit[s];
            eqb_sum += r.eqb[s];
            beta_sum += r.beta[s];
            beta_sq += r.beta[s] * r.beta[s];
        }
        row.n_hat = n_sum / used;
        row.k_hat = k_sum / used;
        row.cost_over_budget = cob_sum / used;
        row.rmse_criterion = crit_sum / used;
        row.eqb = eqb_sum / used;
        const double mean = beta_sum / used;
        row.bias = mean - config.beta_true;
        row.sd = std::sqrt(std::max(0.0, beta_sq / used - mean * mean));
        row.rmse_beta = std::sqrt(std::max(0.0, beta_sq / used - 2 * config.beta_true * mean +
                                                    config.beta_true * config.beta_true));
        if (!config.compute_eqb && s < 3) {
            row.eqb = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace surveyopt
