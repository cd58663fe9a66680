#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveyopt/cost.hpp"

namespace surveyopt {

enum class Method { oga, lasso, post_lasso };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Budget infeasibility and unachievable-target conditions; the CLI maps this
// to its own exit code.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One fitted design: a sample size plus a covariate selection, with the fit
// and cost diagnostics attached. criterion = residual_variance / effective n
// (stacked samples fold the extra 1/L into residual_variance via their row
// count), so smaller is better.
struct Selection {
    SizeChoice size;
    std::vector<int> selected_groups;   // commit order (greedy) or empty (lasso)
    std::vector<int> selected_indices;  // sorted covariate columns
    Eigen::VectorXd coefficients;       // aligned with selected_indices
    double intercept = 0.0;
    double residual_variance = 0.0;
    double criterion = 0.0;
    double cost = 0.0;
    double cost_over_budget = 0.0;

    struct PathStep {
        int step = 0;    // 1-based commit number
        int group = 0;   // committed group index
        double rss = 0;  // rss after the commit
    };
    std::vector<PathStep> path;

    // Penalized-path diagnostics (lasso modes only).
    double lambda = std::numeric_limits<double>::quiet_NaN();
    int bisection_iterations = -1;
    bool converged = true;
};

// Full outer-search output: the winner plus every feasible size's result (so
// grid optimality can be audited) and the sizes skipped as infeasible.
struct DesignResult {
    Selection best;
    std::vector<Selection> sweep;
    std::vector<SizeChoice> skipped;
};

// Outer-search preference order: smaller criterion, then larger effective n,
// then fewer selected covariates. True when a beats b.
bool better_design(const Selection& a, const Selection& b);

// Folds per-size results (nullopt = infeasible, skipped) into a DesignResult
// in grid order, so the winner is identical for any thread layout. Errors
// when every size was infeasible.
DesignResult reduce_design(const SizeGrid& grid, std::vector<std::optional<Selection>>&& slots);

}  // namespace surveyopt
