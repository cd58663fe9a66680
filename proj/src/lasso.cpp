#include "surveyopt/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "surveyopt/parallel.hpp"
#include "surveyopt/regress.hpp"

namespace surveyopt {

namespace {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

}  // namespace

LassoFit lasso_fit(const PreSample& sample, double lambda, const Eigen::VectorXd* warm) {
    if (!(lambda >= 0)) throw std::invalid_argument("lasso_fit: lambda must be >= 0");
    const int rows = sample.n();
    const int cols = sample.m();

    Eigen::VectorXd y = sample.outcome();
    y.array() -= y.mean();
    Eigen::MatrixXd x = sample.covariates;
    const Eigen::RowVectorXd means = x.colwise().mean();
    x.rowwise() -= means;
    // Per-column divisor-N second moments; exactly 1 on studentized samples,
    // kept general so stacked designs (variance 1/L) still descend correctly.
    Eigen::VectorXd vnorm(cols);
    for (int j = 0; j < cols; ++j) vnorm[j] = x.col(j).squaredNorm() / rows;

    LassoFit fit;
    fit.lambda = lambda;
    if (warm && warm->size() == cols) {
        fit.coefficients = *warm;
    } else {
        fit.coefficients = Eigen::VectorXd::Zero(cols);
    }
    Eigen::VectorXd r = y - x * fit.coefficients;

    fit.converged = false;
    for (int sweep = 1; sweep <= kLassoMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < cols; ++j) {
            if (vnorm[j] <= 0.0) continue;
            const double old = fit.coefficients[j];
            const double rho = x.col(j).dot(r) / rows + vnorm[j] * old;
            const double next = soft_threshold(rho, lambda / 2.0) / vnorm[j];
            if (next != old) {
                r += x.col(j) * (old - next);
                fit.coefficients[j] = next;
                max_change = std::max(max_change, std::abs(next - old));
            }
        }
        fit.sweeps = sweep;
        if (max_change < kLassoCoefTol) {
            fit.converged = true;
            break;
        }
    }

    for (int j = 0; j < cols; ++j) {
        if (std::abs(fit.coefficients[j]) > kLassoSupportTol) fit.support.push_back(j);
    }
    fit.rss = r.squaredNorm();
    fit.residual_variance = fit.rss / rows;
    fit.objective = fit.residual_variance + lambda * fit.coefficients.lpNorm<1>();
    return fit;
}

double lasso_lambda_max(const PreSample& sample) {
    const int rows = sample.n();
    Eigen::VectorXd y = sample.outcome();
    y.array() -= y.mean();
    // y is centered, so plain column dots already equal the centered ones.
    double best = 0.0;
    for (int j = 0; j < sample.m(); ++j) {
        best = std::max(best, std::abs(sample.covariates.col(j).dot(y)) / rows);
    }
    return 2.0 * best;
}

double lasso_kkt_violation(const PreSample& sample, const LassoFit& fit) {
    const int rows = sample.n();
    Eigen::VectorXd y = sample.outcome();
    y.array() -= y.mean();
    Eigen::MatrixXd x = sample.covariates;
    const Eigen::RowVectorXd means = x.colwise().mean();
    x.rowwise() -= means;
    const Eigen::VectorXd r = y - x * fit.coefficients;

    double worst = 0.0;
    for (int j = 0; j < sample.m(); ++j) {
        const double g = 2.0 * x.col(j).dot(r) / rows;
        const double coef = fit.coefficients[j];
        if (std::abs(coef) > kLassoSupportTol) {
            // stationarity: gradient balances the penalty subdifferential
            worst = std::max(worst, std::abs(g - fit.lambda * (coef > 0 ? 1.0 : -1.0)));
        } else {
            worst = std::max(worst, std::abs(g) - fit.lambda);
        }
    }
    return std::max(worst, 0.0);
}

// ---------------------------------------------------------------------------
// Memoized path
// ---------------------------------------------------------------------------

struct LassoPath::Impl {
    PreSample work;            // outcome has the forced covariates' fit removed
    std::vector<int> forced_indices;
    Eigen::VectorXd forced_delta;  // prefit coefficients, one per forced index
    double lmax = 0.0;
    std::map<double, LassoFit> memo;
    std::mutex mu;
};

LassoPath::LassoPath(const PreSample& sample, const GroupSpec& groups)
    : impl_(std::make_unique<Impl>()) {
    sample.validate();
    groups.validate(sample.m());
    impl_->work = sample;
    impl_->forced_indices = groups.forced;
    if (!groups.forced.empty()) {
        const Eigen::MatrixXd z = gather_columns(sample, groups.forced);
        const OlsFit pre = ols(z, sample.outcome(), true);
        impl_->forced_delta = pre.coefficients;
        // Only the covariate signal is removed; the level is re-absorbed by
        // the descent's own centering.
        impl_->work.outcomes = (sample.outcome() - z * pre.coefficients).eval();
    }
    impl_->lmax = lasso_lambda_max(impl_->work);
}

LassoPath::~LassoPath() = default;

const LassoFit& LassoPath::at(double lambda, double parent) {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->memo.find(lambda);
    if (it != impl_->memo.end()) return it->second;
    const Eigen::VectorXd* warm = nullptr;
    if (parent >= 0.0) {
        auto p = impl_->memo.find(parent);
        if (p != impl_->memo.end()) warm = &p->second.coefficients;
    }
    LassoFit fit = lasso_fit(impl_->work, lambda, warm);
    return impl_->memo.emplace(lambda, std::move(fit)).first->second;
}

double LassoPath::lambda_max() const { return impl_->lmax; }

const std::vector<int>& LassoPath::forced() const { return impl_->forced_indices; }

std::vector<bool> LassoPath::cost_bits(const LassoFit& fit, int model_covariates) const {
    std::vector<int> idx = impl_->forced_indices;
    idx.insert(idx.end(), fit.support.begin(), fit.support.end());
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return selection_bits(idx, model_covariates, impl_->work.cost_column_of);
}

// ---------------------------------------------------------------------------
// Budget targeting
// ---------------------------------------------------------------------------

Selection lasso_budget(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                       double budget, const SizeChoice& size, Method mode, LassoPath* path) {
    if (mode == Method::oga) {
        throw std::invalid_argument("lasso_budget: mode must be lasso or post-lasso");
    }
    std::optional<LassoPath> local;
    if (!path) {
        local.emplace(sample, groups);
        path = &*local;
    }
    model.validate();
    size.validate();
    const int mc = model.covariate_count();
    const int n_eff = size.effective_n();

    const double forced_cost =
        total_cost(model, selection_bits(path->forced(), mc, sample.cost_column_of), size);
    if (forced_cost > budget) {
        throw InfeasibleError("budget below forced-only cost at n=" + std::to_string(n_eff));
    }

    const double lmax = path->lambda_max();
    const LassoFit* incumbent = &path->at(lmax, -1.0);
    double incumbent_cost = forced_cost;
    int iterations = 0;

    std::vector<int> all(sample.m());
    std::iota(all.begin(), all.end(), 0);
    const bool full_fits =
        total_cost(model, selection_bits(all, mc, sample.cost_column_of), size) <= budget;

    if (full_fits || lmax <= 0.0) {
        // No penalty needed: the whole questionnaire is affordable (or nothing
        // correlates and the path is empty anyway).
        const LassoFit& f = path->at(0.0, -1.0);
        incumbent = &f;
        incumbent_cost = total_cost(model, path->cost_bits(f, mc), size);
    } else {
        // Shrink from lambda_max toward 0, keeping the best feasible support
        // seen: support size need not be monotone off orthonormal designs.
        double lo = 0.0, hi = lmax;
        for (int it = 0; it < kBisectionMaxIter; ++it) {
            iterations = it + 1;
            const double mid = 0.5 * (lo + hi);
            const LassoFit& f = path->at(mid, hi);
            const double cost = total_cost(model, path->cost_bits(f, mc), size);
            if (cost <= budget) {
                if (f.support.size() > incumbent->support.size() ||
                    (f.support.size() == incumbent->support.size() &&
                     f.lambda < incumbent->lambda)) {
                    incumbent = &f;
                    incumbent_cost = cost;
                }
                hi = mid;
                if (budget > 0 && (budget - cost) / budget < kBudgetGapTol) break;
            } else {
                lo = mid;
            }
        }
    }

    std::vector<int> indices = path->forced();
    indices.insert(indices.end(), incumbent->support.begin(), incumbent->support.end());
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

    Selection sel;
    sel.size = size;
    sel.selected_indices = indices;
    sel.lambda = incumbent->lambda;
    sel.bisection_iterations = iterations;
    sel.converged = incumbent->converged;
    sel.cost = incumbent_cost;
    sel.cost_over_budget = budget > 0 ? incumbent_cost / budget : 0.0;

    const auto& forced = path->forced();
    if (mode == Method::post_lasso) {
        const OlsFit refit = ols(gather_columns(sample, indices), sample.outcome(), true);
        sel.coefficients = refit.coefficients;
        sel.intercept = refit.intercept;
        sel.residual_variance = refit.residual_variance;
    } else {
        // Combined predictor: forced prefit plus the penalized fit on the
        // partialed outcome; its residual is exactly the descent residual.
        sel.coefficients = Eigen::VectorXd::Zero(static_cast<int>(indices.size()));
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const int j = indices[i];
            double c = incumbent->coefficients[j];
            auto fpos = std::find(forced.begin(), forced.end(), j);
            if (fpos != forced.end()) {
                c += path->impl().forced_delta[fpos - forced.begin()];
            }
            sel.coefficients[static_cast<int>(i)] = c;
        }
        const PreSample& work = path->impl().work;
        sel.intercept =
            (work.outcome() - work.covariates * incumbent->coefficients).mean();
        sel.residual_variance = incumbent->residual_variance;
    }
    sel.criterion = sel.residual_variance / n_eff;
    return sel;
}

DesignResult lasso_design(const PreSample& sample, const GroupSpec& groups, const CostModel& model,
                          double budget, const SizeGrid& grid, Method mode, int threads) {
    grid.validate();
    LassoPath shared(sample, groups);
    const int count = static_cast<int>(grid.sizes.size());
    std::vector<std::optional<Selection>> slots(count);
    parallel_for(count, threads, [&](int i) {
        try {
            slots[i] = lasso_budget(sample, groups, model, budget, grid.sizes[i], mode, &shared);
        } catch (const InfeasibleError&) {
            slots[i] = std::nullopt;
        }
    });
    return reduce_design(grid, std::move(slots));
}

}  // namespace surveyopt
