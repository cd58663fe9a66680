#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace surveyopt {

// Numerical tolerances shared by the data pipeline.
constexpr double kZeroVarianceTol = 1e-12;

// A rectangular pre-experimental dataset: N rows, L outcome columns, M
// candidate covariate columns. All variances in this codebase divide by N
// (not N-1). Outcomes are never rescaled; covariates may be studentized to
// unit variance, with the divisors recorded in column_scales.
struct PreSample {
    Eigen::MatrixXd outcomes;                 // N x L
    Eigen::MatrixXd covariates;               // N x M
    std::vector<std::string> outcome_names;   // size L
    std::vector<std::string> covariate_names; // size M
    bool studentized = false;
    std::vector<double> column_scales;        // size M, 1.0 when not studentized
    // Maps each covariate column to the covariate index used by cost models.
    // Identity for ordinary samples; stacked samples fold L copies of a
    // covariate back onto the one survey question they came from.
    std::vector<int> cost_column_of;
    // Number of outcome equations this sample represents for criterion
    // normalization: L for a stacked sample, 1 otherwise.
    int equations = 1;

    int n() const { return static_cast<int>(outcomes.rows()); }
    int m() const { return static_cast<int>(covariates.cols()); }
    int l() const { return static_cast<int>(outcomes.cols()); }

    // The single outcome used by selection. Stacked samples always have L = 1.
    Eigen::VectorXd outcome() const;

    void validate() const;
};

// Covariate grouping used by the greedy selector. Groups may overlap; forced
// covariate indices are members of every group so that any committed group
// carries them along.
struct GroupSpec {
    std::vector<std::vector<int>> groups;  // each sorted ascending, nonempty
    std::vector<int> forced;               // sorted ascending

    int count() const { return static_cast<int>(groups.size()); }
    void validate(int m) const;
};

struct LoadReport {
    std::vector<int> dropped_rows;             // 1-based data-row indices
    std::vector<std::string> dropped_columns;  // zero-variance covariates
};

struct LoadResult {
    PreSample sample;
    LoadReport report;
};

// Reads a UTF-8 CSV (first row header, comma delimiter). Rows containing any
// empty or non-numeric cell are dropped (complete-case), then covariate
// columns with variance below kZeroVarianceTol are removed. The columns named
// in outcome_columns become outcomes, all remaining columns covariates.
LoadResult load_csv(const std::string& path, const std::vector<std::string>& outcome_columns);

// Writes the sample back out as CSV (outcomes first). load_csv(save_csv(s))
// reproduces s up to float round-trip; values are printed with enough digits
// to make that a fixed point.
void save_csv(const PreSample& sample, const std::string& path);

// Rescales every covariate column to unit divisor-N variance. Idempotent;
// scales compose so column_scales always records the total divisor applied
// to the original data. Outcomes are untouched.
PreSample studentize(const PreSample& sample);

// Builds the group structure for selection. grouping == nullopt means one
// singleton group per covariate. Forced indices are unioned into every group.
GroupSpec define_groups(const PreSample& sample,
                        const std::optional<std::vector<std::vector<int>>>& grouping,
                        const std::vector<int>& forced = {});

// Turns an L-outcome sample into the stacked single-outcome problem: the
// outcome is the L blocks concatenated, the covariate matrix is the
// block-diagonal expansion (equation l gets its own copy of every covariate),
// and each input group expands to the union of its per-equation copies, so
// selecting a group still means paying for its survey questions once.
std::pair<PreSample, GroupSpec> stack_multivariate(const PreSample& sample, const GroupSpec& groups);

}  // namespace surveyopt
