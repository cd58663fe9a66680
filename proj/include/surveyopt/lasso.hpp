#pragma once

#include <Eigen/Dense>
#include <memory>

#include "surveyopt/data.hpp"
#include "surveyopt/selection.hpp"

namespace surveyopt {

// Coordinate-descent controls for the l1 path.
constexpr double kLassoCoefTol = 1e-8;   // max coefficient change per sweep
constexpr int kLassoMaxSweeps = 10000;
constexpr double kLassoSupportTol = 1e-10;  // |coef| above this counts as support
constexpr double kLassoKktTol = 1e-6;
constexpr int kBisectionMaxIter = 60;
constexpr double kBudgetGapTol = 1e-3;  // stop once (B - cost)/B is this small

struct LassoFit {
    double lambda = 0;
    Eigen::VectorXd coefficients;  // per covariate column
    std::vector<int> support;      // sorted indices with |coef| > kLassoSupportTol
    double rss = 0;                // sum of squared residuals, centered problem
    double residual_variance = 0;  // rss / N
    double objective = 0;          // rss/N + lambda * |coef|_1
    bool converged = true;
    int sweeps = 0;
};

// Minimizes (1/N)|Y - gamma'X|^2 + lambda * |gamma|_1 on the centered data by
// cyclic coordinate descent (soft threshold at lambda/2). The sample should be
// studentized; the outcome keeps its scale. warm, when given, seeds the
// coefficients.
LassoFit lasso_fit(const PreSample& sample, double lambda, const Eigen::VectorXd* warm = nullptr);

// Smallest lambda with empty support: 2 * max_j |(1/N) X_j' Y_centered|.
double lasso_lambda_max(const PreSample& sample);

// Largest KKT stationarity violation of a fit (0 when exact): on-support
// gradients must equal lambda in magnitude, off-support stay below it.
double lasso_kkt_violation(const PreSample& sample, const LassoFit& fit);

// Memoized l1 path shared by the outer search: fits are keyed by lambda and
// warm-started from their bisection parent, so results are independent of
// which size (or thread) requests a value first. Forced covariates are
// partialed out of the outcome up front and re-attached to every selection.
class LassoPath {
  public:
    LassoPath(const PreSample& sample, const GroupSpec& groups);
    ~LassoPath();

    // Fit at a bisection node. parent is the lambda this node was split from
    // (negative: warm-start from zero, used for lambda_max and lambda = 0).
    const LassoFit& at(double lambda, double parent = -1.0);
    double lambda_max() const;
    const std::vector<int>& forced() const;

    // Selection (forced + support) translated to cost-model covariates.
    std::vector<bool> cost_bits(const LassoFit& fit, int model_covariates) const;

    struct Impl;
    Impl& impl() { return *impl_; }

  private:
    std::unique_ptr<Impl> impl_;
};

// Budget-targeted l1 selection at one sample size: bisects lambda on
// [0, lambda_max] for the largest-support selection whose cost fits the
// budget, tracking the best feasible fit seen. mode lasso scores penalized
// residuals; mode post_lasso refits OLS on forced + support. Errors if even
// the forced-only selection is over budget at this size.
Selection lasso_budget(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                       double budget, const SizeChoice& size, Method mode, LassoPath* path = nullptr);

// Outer search over the size grid, same objective and tie rules as
// oga_design.
DesignResult lasso_design(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                          double budget, const SizeGrid& grid, Method mode, int threads = 1);

}  // namespace surveyopt
