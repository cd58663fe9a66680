#pragma once

#include <Eigen/Dense>
#include <vector>

#include "surveyopt/data.hpp"

namespace surveyopt {

// Relative pivot threshold below which a column is treated as linearly
// dependent and its coefficient pinned to zero.
constexpr double kRankTol = 1e-10;

struct OlsFit {
    Eigen::VectorXd coefficients;   // one per supplied column (zeros when dropped)
    double intercept = 0.0;
    Eigen::VectorXd residuals;      // length N
    double rss = 0.0;               // sum of squared residuals
    double residual_variance = 0.0; // rss / N
    std::vector<int> rank_deficient; // positions of columns dropped as dependent
};

// Least squares of outcome on the given columns, via column-pivoted QR.
// intercept=true centers the fit (the intercept itself is reported, not part
// of coefficients). Columns whose pivot falls below kRankTol times the
// leading pivot get coefficient zero and are listed in rank_deficient.
OlsFit ols(const Eigen::MatrixXd& columns, const Eigen::VectorXd& outcome, bool intercept);

struct OrthoGroup {
    Eigen::MatrixXd columns;    // N x g', satisfies columns' * columns / N == I
    Eigen::MatrixXd transform;  // g x g', columns == input * transform
};

// Orthonormalizes a group of columns in the divisor-N inner product,
// preserving their span. Dependent directions are dropped (g' <= g); an
// all-zero group is an error.
OrthoGroup orthonormalize_group(const Eigen::MatrixXd& columns);

// Divisor-N residual variance of the sample outcome regressed (with
// intercept) on the covariate columns listed in indices. Empty indices give
// the outcome variance.
double residual_variance(const PreSample& sample, const std::vector<int>& indices);

// Fits the pre-sample outcome on the indexed columns, then strips that fitted
// signal from an experimental outcome: returns y_exp - gamma' z_exp, where
// z_exp has one column per index (same order). The intercept absorbed during
// fitting is not subtracted; downstream treatment regressions carry their own.
Eigen::VectorXd residualize_outcome(const PreSample& pre, const std::vector<int>& indices,
                                    const Eigen::VectorXd& y_exp, const Eigen::MatrixXd& z_exp);

// Gathers sample covariate columns by index into a dense matrix.
Eigen::MatrixXd gather_columns(const PreSample& sample, const std::vector<int>& indices);

}  // namespace surveyopt
