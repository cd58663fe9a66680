#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "surveyopt/data.hpp"
#include "surveyopt/lasso.hpp"
#include "surveyopt/selection.hpp"

namespace so = surveyopt;

namespace {

so::PreSample random_sample(int n, int m, int signal, double noise_sd, std::uint64_t seed,
                            bool orthonormal = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x;
    if (orthonormal) {
        x = oracles::orthonormal_columns(n, m, rng);
    } else {
        x.resize(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) x(i, j) = normal(rng);
        // correlate neighbouring columns
        for (int j = 1; j < m; ++j) x.col(j) = 0.6 * x.col(j - 1) + 0.8 * x.col(j);
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < signal; ++j) y += (2.0 - 0.4 * j) * x.col(j);
    for (int i = 0; i < n; ++i) y(i) += noise_sd * normal(rng);
    return so::studentize(oracles::make_sample(x, y));
}

}  // namespace

TEST_CASE("univariate fit is the soft-thresholded correlation") {
    std::mt19937_64 rng(2);
    Eigen::MatrixXd x = oracles::orthonormal_columns(100, 1, rng);
    so::PreSample s = so::studentize(oracles::make_sample(x, Eigen::VectorXd::Zero(100)));
    s.outcomes = s.covariates.col(0);
    // outcome equals the unit-variance covariate exactly: correlation rho = 1

    so::LassoFit fit = so::lasso_fit(s, 1.0);
    CHECK(fit.converged);
    CHECK(fit.coefficients(0) == doctest::Approx(oracles::soft_threshold(1.0, 0.5)).epsilon(1e-8));
    CHECK(fit.coefficients(0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(fit.residual_variance == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(fit.objective == doctest::Approx(0.75).epsilon(1e-7));

    CHECK(so::lasso_lambda_max(s) == doctest::Approx(2.0).epsilon(1e-10));
    so::LassoFit at_max = so::lasso_fit(s, so::lasso_lambda_max(s));
    CHECK(at_max.support.empty());

    // a grid of lambdas matches the closed form
    for (double u : {0.1, 0.35, 0.8, 1.5, 1.9}) {
        so::LassoFit f = so::lasso_fit(s, u);
        CHECK(f.coefficients(0) ==
              doctest::Approx(oracles::soft_threshold(1.0, u / 2)).epsilon(1e-8));
    }
}

TEST_CASE("KKT stationarity holds on random fits") {
    for (int run = 0; run < 10; ++run) {
        so::PreSample s = random_sample(120, 8, 3, 0.5, 300 + run, run % 2 == 0);
        double lmax = so::lasso_lambda_max(s);
        for (double u : {0.05, 0.3, 0.7}) {
            so::LassoFit fit = so::lasso_fit(s, u * lmax);
            CHECK(fit.converged);
            CHECK(so::lasso_kkt_violation(s, fit) <= 1e-6);
        }
    }
}

TEST_CASE("residual sum of squares is nondecreasing in lambda") {
    so::PreSample s = random_sample(150, 6, 3, 0.4, 17, false);
    double lmax = so::lasso_lambda_max(s);
    double prev = -1.0;
    for (double u : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
        so::LassoFit fit = so::lasso_fit(s, u * lmax);
        CHECK(fit.rss >= prev - 1e-9);
        prev = fit.rss;
    }
}

TEST_CASE("path warm starts agree with cold fits") {
    so::PreSample s = random_sample(130, 7, 3, 0.3, 23, false);
    so::GroupSpec g = so::define_groups(s, std::nullopt, {});
    so::LassoPath path(s, g);
    double lmax = path.lambda_max();
    CHECK(lmax == doctest::Approx(so::lasso_lambda_max(s)).epsilon(1e-12));

    const so::LassoFit& warm = path.at(lmax / 2, lmax);
    so::LassoFit cold = so::lasso_fit(s, lmax / 2);
    CHECK(warm.support == cold.support);
    CHECK((warm.coefficients - cold.coefficients).cwiseAbs().maxCoeff() < 1e-6);

    // memoized: same object back
    const so::LassoFit& again = path.at(lmax / 2, lmax);
    CHECK(&again == &warm);
}

TEST_CASE("budget bisection fills the budget on an orthonormal design") {
    so::PreSample s = random_sample(200, 6, 3, 0.2, 5);
    so::GroupSpec g = so::define_groups(s, std::nullopt, {});
    so::CostModel flat{so::FlatCost{1.0}};
    auto size = so::SizeChoice::Individuals(50);

    for (auto mode : {so::Method::lasso, so::Method::post_lasso}) {
        so::Selection sel = so::lasso_budget(s, g, flat, 100.0, size, mode);
        CHECK(sel.selected_indices.size() == 2);  // budget admits exactly two covariates
        CHECK(sel.cost == doctest::Approx(100.0));
        CHECK(sel.cost_over_budget == doctest::Approx(1.0));
        CHECK(sel.cost_over_budget > 0.9);
        CHECK(std::isfinite(sel.lambda));
        CHECK(sel.bisection_iterations > 0);
        CHECK(sel.criterion == doctest::Approx(sel.residual_variance / 50.0).epsilon(1e-12));
    }
}

TEST_CASE("post-lasso refit never scores worse than the penalized fit") {
    for (int run = 0; run < 12; ++run) {
        so::PreSample s = random_sample(140, 7, 3, 0.5, 900 + run, run % 2 == 0);
        so::GroupSpec g = so::define_groups(s, std::nullopt, {});
        so::CostModel flat{so::FlatCost{1.0}};
        auto size = so::SizeChoice::Individuals(40);
        double budget = 40.0 * (1 + run % 3);

        so::Selection lasso = so::lasso_budget(s, g, flat, budget, size, so::Method::lasso);
        so::Selection post = so::lasso_budget(s, g, flat, budget, size, so::Method::post_lasso);
        REQUIRE(lasso.selected_indices == post.selected_indices);
        CHECK(post.criterion <= lasso.criterion + 1e-12);
    }
}

TEST_CASE("ample budget takes the unpenalized full fit without bisecting") {
    so::PreSample s = random_sample(100, 5, 5, 0.1, 31);
    so::GroupSpec g = so::define_groups(s, std::nullopt, {});
    so::CostModel flat{so::FlatCost{1.0}};
    so::Selection sel =
        so::lasso_budget(s, g, flat, 1e9, so::SizeChoice::Individuals(30), so::Method::lasso);
    CHECK(sel.lambda == 0.0);
    CHECK(sel.bisection_iterations == 0);
    CHECK(sel.selected_indices.size() == 5);
}

TEST_CASE("tight budgets produce the empty selection, infeasible forced cost throws") {
    so::PreSample s = random_sample(100, 5, 2, 0.5, 41);
    so::GroupSpec g = so::define_groups(s, std::nullopt, {});
    so::CostModel flat{so::FlatCost{1.0}};
    auto size = so::SizeChoice::Individuals(10);

    so::Selection sel = so::lasso_budget(s, g, flat, 5.0, size, so::Method::lasso);
    CHECK(sel.selected_indices.empty());
    CHECK(sel.cost == 0.0);

    so::GroupSpec forced = so::define_groups(s, std::nullopt, {0});
    CHECK_THROWS_AS(so::lasso_budget(s, forced, flat, 5.0, size, so::Method::lasso),
                    so::InfeasibleError);
}

TEST_CASE("forced covariates are partialed out and re-attached") {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> normal;
    const int n = 160;
    Eigen::MatrixXd x = oracles::orthonormal_columns(n, 4, rng);
    Eigen::VectorXd y = 1.2 * x.col(0) + 0.8 * x.col(2);
    for (int i = 0; i < n; ++i) y(i) += 0.2 * normal(rng);
    so::PreSample s = so::studentize(oracles::make_sample(x, y));
    so::GroupSpec g = so::define_groups(s, std::nullopt, {0});
    so::CostModel flat{so::FlatCost{1.0}};
    auto size = so::SizeChoice::Individuals(40);

    for (auto mode : {so::Method::lasso, so::Method::post_lasso}) {
        so::Selection sel = so::lasso_budget(s, g, flat, 80.0, size, mode);
        REQUIRE(!sel.selected_indices.empty());
        CHECK(sel.selected_indices.front() == 0);  // forced column always present
        // budget still caps the selection: 80 pays for two covariates at n=40
        CHECK(sel.selected_indices.size() == 2);
        CHECK(sel.selected_indices[1] == 2);  // the true second signal
    }
}

TEST_CASE("outer search is independent of the thread count") {
    so::PreSample s = random_sample(150, 6, 3, 0.4, 67, false);
    so::GroupSpec g = so::define_groups(s, std::nullopt, {});
    so::CostModel flat{so::FlatCost{1.0}};
    so::SizeGrid grid = so::SizeGrid::individuals(20, 60, 10);

    so::DesignResult a = so::lasso_design(s, g, flat, 90.0, grid, so::Method::lasso, 1);
    so::DesignResult b = so::lasso_design(s, g, flat, 90.0, grid, so::Method::lasso, 3);
    CHECK(a.best.size == b.best.size);
    CHECK(a.best.selected_indices == b.best.selected_indices);
    CHECK(a.best.lambda == b.best.lambda);
    CHECK(a.best.criterion == b.best.criterion);
    REQUIRE(a.sweep.size() == b.sweep.size());
    for (std::size_t i = 0; i < a.sweep.size(); ++i) {
        CHECK(a.sweep[i].lambda == b.sweep[i].lambda);
        CHECK(a.sweep[i].criterion == b.sweep[i].criterion);
    }
}
