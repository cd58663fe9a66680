#include "surveyopt/regress.hpp"

#include <cmath>
#include <stdexcept>

namespace surveyopt {

namespace {

void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite values");
}

}  // namespace

Eigen::MatrixXd gather_columns(const PreSample& sample, const std::vector<int>& indices) {
    Eigen::MatrixXd out(sample.n(), static_cast<int>(indices.size()));
    for (int k = 0; k < static_cast<int>(indices.size()); ++k) {
        int j = indices[k];
        if (j < 0 || j >= sample.m()) {
            throw std::invalid_argument("gather_columns: covariate index out of range");
        }
        out.col(k) = sample.covariates.col(j);
    }
    return out;
}

OlsFit ols(const Eigen::MatrixXd& columns, const Eigen::VectorXd& outcome, bool intercept) {
    const int n = static_cast<int>(outcome.size());
    const int k = static_cast<int>(columns.cols());
    if (columns.rows() != n && k > 0) throw std::invalid_argument("ols: row mismatch");
    if (k + (intercept ? 1 : 0) > n) throw std::invalid_argument("ols: more parameters than rows");
    check_finite(columns, "ols columns");
    check_finite(outcome, "ols outcome");

    OlsFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(k);

    Eigen::VectorXd y = outcome;
    Eigen::MatrixXd x = columns;
    Eigen::RowVectorXd col_means;
    double y_mean = 0.0;
    if (intercept) {
        y_mean = y.mean();
        y.array() -= y_mean;
        if (k > 0) {
            col_means = x.colwise().mean();
            x.rowwise() -= col_means;
        }
    }

    if (k > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
        qr.setThreshold(kRankTol);
        qr.compute(x);
        fit.coefficients = qr.solve(y);
        const int rank = static_cast<int>(qr.rank());
        const auto& perm = qr.colsPermutation().indices();
        for (int i = rank; i < k; ++i) {
            fit.rank_deficient.push_back(perm[i]);
            fit.coefficients[perm[i]] = 0.0;  // basic solution: dependent columns carry nothing
        }
        std::sort(fit.rank_deficient.begin(), fit.rank_deficient.end());
        fit.residuals = y - x * fit.coefficients;
    } else {
        fit.residuals = y;
    }

    if (intercept) {
        fit.intercept = y_mean;
        if (k > 0) fit.intercept -= col_means * fit.coefficients;
    }
    fit.rss = fit.residuals.squaredNorm();
    fit.residual_variance = fit.rss / static_cast<double>(n);
    return fit;
}

OrthoGroup orthonormalize_group(const Eigen::MatrixXd& columns) {
    const int n = static_cast<int>(columns.rows());
    const int g = static_cast<int>(columns.cols());
    if (n == 0 || g == 0) throw std::invalid_argument("orthonormalize_group: empty input");
    check_finite(columns, "orthonormalize_group");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(kRankTol);
    qr.compute(columns);
    const int rank = static_cast<int>(qr.rank());
    if (rank == 0) throw std::invalid_argument("orthonormalize_group: group has no nonzero direction");

    const double root_n = std::sqrt(static_cast<double>(n));
    Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);

    // columns * P = Q R  =>  Q_r = (columns * P)(:, :r) * R11^{-1}; rescale by
    // sqrt(N) so the divisor-N Gram is the identity.
    Eigen::MatrixXd r11 = qr.matrixR().topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(g, rank);
    basis.topRows(rank) =
        r11.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(rank, rank));

    OrthoGroup out;
    out.transform = (qr.colsPermutation() * basis) * root_n;
    out.columns = thin_q * root_n;
    return out;
}

double residual_variance(const PreSample& sample, const std::vector<int>& indices) {
    return ols(gather_columns(sample, indices), sample.outcome(), true).residual_variance;
}

Eigen::VectorXd residualize_outcome(const PreSample& pre, const std::vector<int>& indices,
                                    const Eigen::VectorXd& y_exp, const Eigen::MatrixXd& z_exp) {
    if (z_exp.cols() != static_cast<int>(indices.size())) {
        throw std::invalid_argument("residualize_outcome: column count does not match indices");
    }
    if (z_exp.rows() != y_exp.size()) {
        throw std::invalid_argument("residualize_outcome: experimental row mismatch");
    }
    OlsFit fit = ols(gather_columns(pre, indices), pre.outcome(), true);
    if (indices.empty()) return y_exp;
    return y_exp - z_exp * fit.coefficients;
}

}  // namespace surveyopt
