#pragma once

#include <Eigen/Dense>

#include "surveyopt/data.hpp"
#include "surveyopt/selection.hpp"

namespace surveyopt {

// Residual-norm floor: the greedy loop stops once the fit is numerically
// exact, |r|^2_N < kExactFitTol * |Y|^2_N.
constexpr double kExactFitTol = 1e-14;

// Budget-terminated group orthogonal greedy selection at a fixed sample size.
// Groups are orthonormalized on entry; each round picks the unselected group
// with the largest l2 correlation against the current residual (ties to the
// lowest group index), commits it only if the enlarged selection still fits
// the budget at this size (otherwise the search terminates), and refits all
// selected covariates by OLS with intercept. Stops on budget, exhaustion, or
// an exact fit. Errors if the empty selection is already over budget.
Selection oga_inner(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                    double budget, const SizeChoice& size);

// Outer search: runs oga_inner at every feasible grid size and returns the
// size/selection pair minimizing criterion = residual_variance / n. Ties go
// to the larger effective n, then the smaller selection.
DesignResult oga_design(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                        double budget, const SizeGrid& grid, int threads = 1);

struct RiskGapResult {
    double gap = 0;    // (|Y - fhat|^2_N - |Y - f|^2_N) / n
    double bound = 0;  // 4 |f|^2_{L1,N} / (n * min(p, k)); +inf when k == 0
    double l1n = 0;    // group-l2 norm sum of the supplied decomposition
};

// Audits a greedy selection against its population risk bound, given the true
// coefficient vector gamma0 on the sample's covariates. The decomposition
// norm is computed in each group's orthonormalized coordinates; any valid
// decomposition upper-bounds the minimal one, so the reported bound is
// conservative.
RiskGapResult risk_gap(const Selection& selection, const Eigen::VectorXd& gamma0,
                       const PreSample& sample, const GroupSpec& groups);

}  // namespace surveyopt
