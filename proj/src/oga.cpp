#include "surveyopt/oga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>

#include "surveyopt/parallel.hpp"
#include "surveyopt/regress.hpp"

namespace surveyopt {

namespace {

constexpr double kZeroCorrelationTol = 1e-12;

// Per-group orthonormalized columns; computed once and shared across the
// whole size grid (they do not depend on the sample size decision).
struct GreedyContext {
    std::vector<OrthoGroup> ortho;
    int model_covariates = 0;  // -1 for flat models (any width)
};

GreedyContext build_context(const PreSample& sample, const GroupSpec& groups,
                            const CostModel& model) {
    sample.validate();
    groups.validate(sample.m());
    model.validate();
    const int mc = model.covariate_count();
    if (mc >= 0) {
        // Every column must price into the model, via the stacking map if set.
        for (int j = 0; j < sample.m(); ++j) {
            int c = sample.cost_column_of.empty() ? j : sample.cost_column_of[j];
            if (c < 0 || c >= mc) {
                throw std::invalid_argument("cost model does not price covariate column " +
                                            std::to_string(j));
            }
        }
    }
    GreedyContext ctx;
    ctx.model_covariates = mc;
    ctx.ortho.reserve(groups.groups.size());
    for (const auto& g : groups.groups) {
        ctx.ortho.push_back(orthonormalize_group(gather_columns(sample, g)));
    }
    return ctx;
}

std::vector<int> union_with_group(const std::vector<int>& selected, const std::vector<int>& group) {
    std::set<int> s(selected.begin(), selected.end());
    s.insert(group.begin(), group.end());
    return {s.begin(), s.end()};
}

double selection_cost(const GreedyContext& ctx, const PreSample& sample, const CostModel& model,
                      const std::vector<int>& indices, const SizeChoice& size) {
    return total_cost(model, selection_bits(indices, ctx.model_covariates, sample.cost_column_of),
                      size);
}

Selection greedy_at_size(const PreSample& sample, const GroupSpec& groups,
                         const GreedyContext& ctx, const CostModel& model, double budget,
                         const SizeChoice& size) {
    size.validate();
    const int n_eff = size.effective_n();
    const int rows = sample.n();
    const Eigen::VectorXd y = sample.outcome();
    const double y_sq_n = y.squaredNorm() / rows;

    Selection sel;
    sel.size = size;
    sel.cost = selection_cost(ctx, sample, model, {}, size);
    if (sel.cost > budget) {
        throw InfeasibleError("budget below outcome-only cost at n=" + std::to_string(n_eff));
    }

    // Intercept-only start: residual is the centered outcome.
    Eigen::VectorXd r = y.array() - y.mean();
    double rss = r.squaredNorm();
    sel.intercept = y.mean();
    sel.residual_variance = rss / rows;

    const int num_groups = static_cast<int>(groups.groups.size());
    std::vector<bool> used(num_groups, false);
    OlsFit fit;

    for (int step = 1; step <= num_groups; ++step) {
        if (rss / rows < kExactFitTol * y_sq_n) break;

        int best = -1;
        double best_score = 0.0;
        for (int j = 0; j < num_groups; ++j) {
            if (used[j]) continue;
            const double score = (ctx.ortho[j].columns.transpose() * r).norm();
            if (best < 0 || score > best_score) {
                best = j;
                best_score = score;
            }
        }
        if (best < 0) break;  // every group already selected
        if (best_score <= kZeroCorrelationTol * std::sqrt(static_cast<double>(rows)) * r.norm()) {
            break;  // nothing left correlates with the residual
        }

        // Feasibility is checked before committing so the returned selection
        // never exceeds the budget; an over-budget candidate ends the search.
        std::vector<int> candidate = union_with_group(sel.selected_indices, groups.groups[best]);
        const double cost = selection_cost(ctx, sample, model, candidate, size);
        if (cost > budget) break;

        fit = ols(gather_columns(sample, candidate), y, true);
        if (fit.rss > rss * (1.0 + 1e-9) + 1e-12) {
            throw std::logic_error("greedy step increased the residual sum of squares");
        }
        used[best] = true;
        sel.selected_groups.push_back(best);
        sel.selected_indices = std::move(candidate);
        sel.coefficients = fit.coefficients;
        sel.intercept = fit.intercept;
        sel.cost = cost;
        r = fit.residuals;
        rss = fit.rss;
        sel.residual_variance = fit.residual_variance;
        sel.path.push_back({step, best, rss});
    }

    sel.criterion = sel.residual_variance / n_eff;
    sel.cost_over_budget = sel.cost / budget;
    return sel;
}

}  // namespace

Selection oga_inner(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                    double budget, const SizeChoice& size) {
    GreedyContext ctx = build_context(sample, groups, model);
    return greedy_at_size(sample, groups, ctx, model, budget, size);
}

DesignResult oga_design(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                        double budget, const SizeGrid& grid, int threads) {
    grid.validate();
    GreedyContext ctx = build_context(sample, groups, model);

    const int count = static_cast<int>(grid.sizes.size());
    std::vector<std::optional<Selection>> slots(count);
    parallel_for(count, threads, [&](int i) {
        try {
            slots[i] = greedy_at_size(sample, groups, ctx, model, budget, grid.sizes[i]);
        } catch (const InfeasibleError&) {
            slots[i] = std::nullopt;  // size skipped, recorded below
        }
    });
    return reduce_design(grid, std::move(slots));
}

RiskGapResult risk_gap(const Selection& selection, const Eigen::VectorXd& gamma0,
                       const PreSample& sample, const GroupSpec& groups) {
    sample.validate();
    groups.validate(sample.m());
    if (gamma0.size() != sample.m()) {
        throw std::invalid_argument("risk_gap: coefficient vector length mismatch");
    }
    const int rows = sample.n();
    const Eigen::VectorXd y = sample.outcome();

    Eigen::VectorXd yhat = Eigen::VectorXd::Constant(rows, selection.intercept);
    if (!selection.selected_indices.empty()) {
        yhat += gather_columns(sample, selection.selected_indices) * selection.coefficients;
    }
    const Eigen::VectorXd f = sample.covariates * gamma0;

    const int n_eff = selection.size.effective_n();
    RiskGapResult out;
    out.gap = ((y - yhat).squaredNorm() - (y - f).squaredNorm()) / rows / n_eff;

    // Norm of the supplied decomposition of f across groups, each group's
    // share measured in its orthonormalized coordinates. Covariates living in
    // several groups are attributed to the first; any valid decomposition
    // upper-bounds the minimal norm, so the bound stays conservative.
    std::vector<int> owner(sample.m(), -1);
    for (std::size_t g = 0; g < groups.groups.size(); ++g) {
        for (int j : groups.groups[g]) {
            if (owner[j] < 0) owner[j] = static_cast<int>(g);
        }
    }
    for (int j = 0; j < sample.m(); ++j) {
        if (gamma0[j] != 0.0 && owner[j] < 0) {
            throw std::invalid_argument("risk_gap: nonzero coefficient outside every group");
        }
    }
    double l1n = 0.0;
    for (std::size_t g = 0; g < groups.groups.size(); ++g) {
        const auto& members = groups.groups[g];
        Eigen::VectorXd part = Eigen::VectorXd::Zero(rows);
        bool any = false;
        for (int j : members) {
            if (owner[j] == static_cast<int>(g) && gamma0[j] != 0.0) {
                part += sample.covariates.col(j) * gamma0[j];
                any = true;
            }
        }
        if (!any) continue;
        OrthoGroup og = orthonormalize_group(gather_columns(sample, members));
        l1n += (og.columns.transpose() * part).norm() / rows;
    }
    out.l1n = l1n;

    const int k = static_cast<int>(selection.selected_groups.size());
    const int p = static_cast<int>(groups.groups.size());
    if (l1n == 0.0) {
        out.bound = 0.0;
    } else if (k == 0) {
        out.bound = std::numeric_limits<double>::infinity();
    } else {
        out.bound = 4.0 * l1n * l1n / (static_cast<double>(n_eff) * std::min(p, k));
    }
    return out;
}

}  // namespace surveyopt
