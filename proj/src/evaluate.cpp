#include "surveyopt/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "surveyopt/lasso.hpp"
#include "surveyopt/oga.hpp"
#include "surveyopt/regress.hpp"
#include "surveyopt/rng.hpp"
#include "surveyopt/stats.hpp"

namespace surveyopt {

double ate_mse(double sigma2, int n, double dbar) {
    if (!(sigma2 >= 0)) throw std::invalid_argument("ate_mse: negative variance");
    if (n < 1) throw std::invalid_argument("ate_mse: n must be positive");
    if (!(dbar > 0 && dbar < 1)) throw std::invalid_argument("ate_mse: dbar must be in (0,1)");
    return sigma2 / (n * dbar * (1.0 - dbar));
}

double power(const PowerSpec& spec) {
    if (!(spec.sigma > 0)) throw std::invalid_argument("power: sigma must be positive");
    if (spec.n < 1) throw std::invalid_argument("power: n must be positive");
    if (!(spec.dbar > 0 && spec.dbar < 1)) throw std::invalid_argument("power: dbar in (0,1)");
    if (!(spec.alpha > 0 && spec.alpha < 1)) throw std::invalid_argument("power: alpha in (0,1)");
    const double b =
        spec.beta * std::sqrt(spec.n * spec.dbar * (1.0 - spec.dbar)) / spec.sigma;
    const double c = normal_quantile(1.0 - spec.alpha / 2.0);
    return 1.0 + normal_cdf(b - c) - normal_cdf(b + c);
}

DesignResult run_design(Method method, const PreSample& sample, const GroupSpec& groups,
                        const CostModel& model, double budget, const SizeGrid& grid, int threads) {
    if (method == Method::oga) {
        return oga_design(sample, groups, model, budget, grid, threads);
    }
    return lasso_design(sample, groups, model, budget, grid, method, threads);
}

double bisect_smallest_feasible(const std::function<bool(double)>& feasible, double lo, double hi,
                                int max_iter, double rel_tol, int* iterations) {
    // Caller guarantees feasible(hi). Feasibility can be ragged in b (grid
    // steps), so the answer is the smallest feasible probe actually seen.
    double best = hi;
    int used = 0;
    for (int it = 0; it < max_iter && hi - lo > rel_tol * hi; ++it) {
        used = it + 1;
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) {
            hi = mid;
            best = std::min(best, mid);
        } else {
            lo = mid;
        }
    }
    if (iterations) *iterations = used;
    return best;
}

EqbResult equivalent_budget(Method method, const PreSample& sample, const GroupSpec& groups,
                            const CostModel& model, const SizeGrid& grid, double target_criterion,
                            double reference_budget, double cap_multiplier, int threads) {
    if (!(reference_budget > 0)) {
        throw std::invalid_argument("equivalent_budget: reference budget must be positive");
    }
    const double cap = cap_multiplier * reference_budget;
    auto feasible = [&](double b) {
        if (!(b > 0)) return false;
        try {
            return run_design(method, sample, groups, model, b, grid, threads).best.criterion <=
                   target_criterion;
        } catch (const InfeasibleError&) {
            return false;
        }
    };
    if (!feasible(cap)) {
        throw InfeasibleError("target criterion unreachable below the budget cap");
    }
    EqbResult out;
    out.budget = bisect_smallest_feasible(feasible, 0.0, cap, kBisectionMaxIter, kBudgetGapTol,
                                          &out.iterations);
    out.relative = out.budget / reference_budget;
    return out;
}

namespace {

PreSample subset_rows(const PreSample& s, const std::vector<int>& rows) {
    PreSample out = s;
    const int k = static_cast<int>(rows.size());
    out.outcomes.resize(k, s.outcomes.cols());
    out.covariates.resize(k, s.covariates.cols());
    for (int i = 0; i < k; ++i) {
        out.outcomes.row(i) = s.outcomes.row(rows[i]);
        out.covariates.row(i) = s.covariates.row(rows[i]);
    }
    // Unit variances do not survive subsetting; selection re-studentizes.
    out.studentized = false;
    return out;
}

// Held-out criterion of a training-fitted predictor: divisor-|test| residual
// variance scaled by the design's sample-size decision.
double oos_criterion(const PreSample& test, const std::vector<int>& indices, const OlsFit& fit,
                     int n_design) {
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(test.n(), fit.intercept);
    if (!indices.empty()) pred += gather_columns(test, indices) * fit.coefficients;
    const double rv = (test.outcome() - pred).squaredNorm() / test.n();
    return rv / n_design;
}

}  // namespace

KfoldReport kfold_evaluate(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                           const SizeGrid& grid, Method method, int folds, std::uint64_t seed,
                           int threads, bool with_eqb) {
    sample.validate();
    if (folds < 2) throw std::invalid_argument("kfold_evaluate: need at least 2 folds");
    if (folds > sample.n()) throw std::invalid_argument("kfold_evaluate: more folds than rows");

    std::vector<int> order(sample.n());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<int> all_covariates(sample.m());
    std::iota(all_covariates.begin(), all_covariates.end(), 0);
    const int mc = model.covariate_count();

    KfoldReport report;
    report.method = method;
    report.folds = folds;

    for (int f = 0; f < folds; ++f) {
        std::vector<int> test_rows, train_rows;
        for (int i = 0; i < sample.n(); ++i) {
            (i % folds == f ? test_rows : train_rows).push_back(order[i]);
        }
        std::sort(test_rows.begin(), test_rows.end());
        std::sort(train_rows.begin(), train_rows.end());

        const PreSample train = subset_rows(sample, train_rows);
        const PreSample test = subset_rows(sample, test_rows);
        const int n_train = train.n();

        // The fold's budget prices the full questionnaire at the training
        // length, mirroring what the original data collection spent.
        const double budget = total_cost(
            model, selection_bits(all_covariates, mc, sample.cost_column_of),
            SizeChoice::Individuals(n_train));

        const PreSample train_std = studentize(train);
        const DesignResult designed =
            run_design(method, train_std, groups, model, budget, grid, threads);
        const Selection& best = designed.best;

        // Coefficients are refit on unscaled training data so the held-out
        // score does not depend on the training fold's own scale estimates.
        const OlsFit fit = ols(gather_columns(train, best.selected_indices), train.outcome(), true);
        const double crit = oos_criterion(test, best.selected_indices, fit,
                                          best.size.effective_n());

        FoldResult fr;
        fr.fold = f + 1;
        fr.budget = budget;
        fr.n_hat = best.size.effective_n();
        fr.k_hat = static_cast<double>(best.selected_indices.size());
        fr.cost_over_budget = best.cost / budget;
        fr.rmse = std::sqrt(crit);

        if (with_eqb) {
            // Benchmark: the full questionnaire fit at the training length,
            // scored on the same held-out fold.
            const OlsFit full_fit = ols(gather_columns(train, all_covariates), train.outcome(), true);
            const double target = oos_criterion(test, all_covariates, full_fit, n_train);
            auto feasible = [&](double b) {
                if (!(b > 0)) return false;
                try {
                    const DesignResult d = run_design(method, train_std, groups, model, b, grid, threads);
                    const OlsFit bf =
                        ols(gather_columns(train, d.best.selected_indices), train.outcome(), true);
                    return oos_criterion(test, d.best.selected_indices, bf,
                                         d.best.size.effective_n()) <= target;
                } catch (const InfeasibleError&) {
                    return false;
                }
            };
            const double cap = 10.0 * budget;
            if (feasible(cap)) {
                fr.eqb = bisect_smallest_feasible(feasible, 0.0, cap, kBisectionMaxIter,
                                                  kBudgetGapTol, nullptr);
            }
        }
        report.per_fold.push_back(fr);
    }

    for (const FoldResult& fr : report.per_fold) {
        report.avg_n += fr.n_hat / folds;
        report.avg_k += fr.k_hat / folds;
        report.avg_cost_over_budget += fr.cost_over_budget / folds;
        report.avg_rmse += fr.rmse / folds;
    }
    if (with_eqb) {
        report.avg_eqb = 0.0;
        for (const FoldResult& fr : report.per_fold) report.avg_eqb += fr.eqb / folds;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Continuous-k oracles
// ---------------------------------------------------------------------------

namespace {

double derivative5(const std::function<double(double)>& f, double x) {
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

RootResult bisect_foc(const std::function<double(double)>& g, double k_lo, double k_hi) {
    if (!(k_lo > 0) || !(k_hi > k_lo)) {
        throw std::invalid_argument("analytic k search: need 0 < k_lo < k_hi");
    }
    double ga = g(k_lo);
    double gb = g(k_hi);
    RootResult out;
    if (ga == 0.0) return {k_lo, false};
    if (gb == 0.0) return {k_hi, false};
    if ((ga > 0) == (gb > 0)) {
        // No sign change: the objective is one-sided on the whole range, so
        // the optimum sits at a boundary.
        out.corner = true;
        out.k = ga > 0 ? k_lo : k_hi;
        return out;
    }
    double a = k_lo, b = k_hi;
    while (b - a > 1e-8) {
        const double mid = 0.5 * (a + b);
        const double gm = g(mid);
        if (gm == 0.0) return {mid, false};
        if ((gm > 0) == (ga > 0)) {
            a = mid;
        } else {
            b = mid;
        }
    }
    out.k = 0.5 * (a + b);
    return out;
}

}  // namespace

RootResult analytic_k_uniform(const std::function<double(double)>& sigma2, double /*budget*/,
                              double k_lo, double k_hi) {
    auto g = [&](double k) { return sigma2(k) / k + derivative5(sigma2, k); };
    return bisect_foc(g, k_lo, k_hi);
}

RootResult analytic_k_fixedcost(const std::function<double(double)>& sigma2, double fixed_cost,
                                double /*budget*/, double k_lo, double k_hi) {
    if (!(fixed_cost >= 0)) throw std::invalid_argument("analytic_k_fixedcost: F must be >= 0");
    auto g = [&](double k) {
        const double s = sigma2(k);
        if (!(s > 0)) throw std::invalid_argument("analytic_k_fixedcost: sigma2 must stay positive");
        return 1.0 / (fixed_cost + k) + derivative5(sigma2, k) / s;
    };
    return bisect_foc(g, k_lo, k_hi);
}

std::vector<bool> foc_check_heterogeneous(const std::vector<std::vector<double>>& prices_by_type,
                                          const std::vector<double>& sigma2_slopes,
                                          double sigma2_base, const std::vector<double>& allocation,
                                          double tol) {
    const std::size_t types = prices_by_type.size();
    if (sigma2_slopes.size() != types || allocation.size() != types) {
        throw std::invalid_argument("foc_check_heterogeneous: length mismatch");
    }
    double sigma2 = sigma2_base;
    double total = 0.0;
    std::vector<double> marginal(types);
    for (std::size_t r = 0; r < types; ++r) {
        const auto& prices = prices_by_type[r];
        if (prices.empty()) throw std::invalid_argument("foc_check_heterogeneous: empty price list");
        if (!std::is_sorted(prices.begin(), prices.end())) {
            throw std::invalid_argument("foc_check_heterogeneous: prices must ascend");
        }
        const double k = allocation[r];
        if (!(k >= 0)) throw std::invalid_argument("foc_check_heterogeneous: negative allocation");
        sigma2 += sigma2_slopes[r] * k;
        // Piecewise-linear spending: whole variables at their listed price,
        // the marginal one pro-rata.
        const std::size_t whole = std::min(static_cast<std::size_t>(k), prices.size());
        for (std::size_t i = 0; i < whole; ++i) total += prices[i];
        const std::size_t next = std::min(whole, prices.size() - 1);
        if (whole < prices.size()) total += (k - whole) * prices[whole];
        marginal[r] = prices[next];
    }
    if (!(sigma2 > 0)) throw std::invalid_argument("foc_check_heterogeneous: sigma2 not positive");

    std::vector<bool> ok(types);
    for (std::size_t r = 0; r < types; ++r) {
        const double lhs = marginal[r] / total;
        const double rhs = -sigma2_slopes[r] / sigma2;
        ok[r] = std::abs(lhs - rhs) <= tol * std::max(1.0, std::abs(rhs));
    }
    return ok;
}

}  // namespace surveyopt
