#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "surveyopt/regress.hpp"

namespace so = surveyopt;

TEST_CASE("ols recovers an exact line") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    so::OlsFit fit = so::ols(x, y, true);
    CHECK(fit.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.rss == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(fit.residual_variance == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(fit.rank_deficient.empty());
}

TEST_CASE("ols without intercept") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    Eigen::VectorXd y = 2.0 * x.col(0);
    so::OlsFit fit = so::ols(x, y, false);
    CHECK(fit.coefficients(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == 0.0);
}

TEST_CASE("ols matches the normal equations on a random system") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    const int n = 40, m = 3;
    Eigen::MatrixXd x(n, m);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = normal(rng);
        for (int j = 0; j < m; ++j) x(i, j) = normal(rng);
    }
    so::OlsFit fit = so::ols(x, y, true);

    // oracle: solve the centered normal equations directly
    Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
    Eigen::VectorXd yc = y.array() - y.mean();
    Eigen::VectorXd beta = (xc.transpose() * xc).ldlt().solve(xc.transpose() * yc);
    CHECK((fit.coefficients - beta).cwiseAbs().maxCoeff() < 1e-10);
    double intercept = y.mean() - x.colwise().mean().dot(beta);
    CHECK(fit.intercept == doctest::Approx(intercept).epsilon(1e-10));
    double rss = (yc - xc * beta).squaredNorm();
    CHECK(fit.rss == doctest::Approx(rss).epsilon(1e-10));
    CHECK(fit.residual_variance == doctest::Approx(rss / n).epsilon(1e-10));
    CHECK((x * fit.coefficients).size() == n);
    CHECK(fit.residuals.size() == n);
}

TEST_CASE("ols drops a duplicated column instead of failing") {
    Eigen::MatrixXd x(5, 2);
    x << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
    Eigen::VectorXd y(5);
    y << 2, 4, 6, 8, 10;
    so::OlsFit fit = so::ols(x, y, true);
    CHECK(fit.rank_deficient.size() == 1);
    CHECK(fit.rss == doctest::Approx(0.0).epsilon(1e-18));
    // the surviving column carries the whole coefficient
    CHECK(fit.coefficients.cwiseAbs().sum() == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("orthonormalize_group yields divisor-N orthonormal columns spanning the input") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    const int n = 50;
    Eigen::MatrixXd x(n, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = normal(rng);

    so::OrthoGroup og = so::orthonormalize_group(x);
    Eigen::MatrixXd gram = og.columns.transpose() * og.columns / n;
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((x * og.transform - og.columns).cwiseAbs().maxCoeff() < 1e-10);

    // duplicated direction gets dropped
    Eigen::MatrixXd xd(n, 2);
    xd.col(0) = x.col(0);
    xd.col(1) = 2.0 * x.col(0);
    so::OrthoGroup dep = so::orthonormalize_group(xd);
    CHECK(dep.columns.cols() == 1);

    CHECK_THROWS(so::orthonormalize_group(Eigen::MatrixXd::Zero(n, 1)));
}

TEST_CASE("residual_variance with empty selection is the outcome variance") {
    std::mt19937_64 rng(13);
    Eigen::MatrixXd x = oracles::orthonormal_columns(30, 2, rng);
    std::normal_distribution<double> normal;
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y(i) = normal(rng);
    so::PreSample s = oracles::make_sample(x, y);

    double var = (y.array() - y.mean()).square().sum() / 30;
    CHECK(so::residual_variance(s, {}) == doctest::Approx(var).epsilon(1e-12));
    // adding regressors can only help
    CHECK(so::residual_variance(s, {0, 1}) <= var + 1e-12);
}

TEST_CASE("residualize_outcome strips the fitted pre-sample signal") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    const int n = 80;
    Eigen::MatrixXd x = oracles::orthonormal_columns(n, 3, rng);
    Eigen::VectorXd y = 2.0 * x.col(0) - 1.0 * x.col(2);
    for (int i = 0; i < n; ++i) y(i) += 0.1 * normal(rng);
    so::PreSample s = oracles::make_sample(x, y);

    const int ne = 10;
    Eigen::MatrixXd z(ne, 2);
    Eigen::VectorXd ye(ne);
    for (int i = 0; i < ne; ++i) {
        ye(i) = normal(rng);
        z(i, 0) = normal(rng);
        z(i, 1) = normal(rng);
    }
    Eigen::VectorXd res = so::residualize_outcome(s, {0, 2}, ye, z);
    so::OlsFit fit = so::ols(so::gather_columns(s, {0, 2}), y, true);
    Eigen::VectorXd manual = ye - z * fit.coefficients;
    CHECK((res - manual).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gather_columns picks columns in order") {
    Eigen::MatrixXd x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    so::PreSample s = oracles::make_sample(x, Eigen::VectorXd::Zero(2));
    Eigen::MatrixXd g = so::gather_columns(s, {2, 0});
    CHECK(g(0, 0) == 3);
    CHECK(g(1, 1) == 4);
}
