#include "surveyopt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace surveyopt {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

double column_variance(const Eigen::VectorXd& col) {
    const double mean = col.mean();
    return (col.array() - mean).square().sum() / static_cast<double>(col.size());
}

}  // namespace

Eigen::VectorXd PreSample::outcome() const {
    if (l() != 1) {
        throw std::invalid_argument(
            "PreSample::outcome: sample has multiple outcome columns; stack it first");
    }
    return outcomes.col(0);
}

void PreSample::validate() const {
    if (outcomes.rows() != covariates.rows() && m() > 0) {
        throw std::invalid_argument("PreSample: outcome/covariate row mismatch");
    }
    if (n() < 2) throw std::invalid_argument("PreSample: at least two rows required");
    if (l() < 1) throw std::invalid_argument("PreSample: at least one outcome required");
    if (static_cast<int>(outcome_names.size()) != l() ||
        static_cast<int>(covariate_names.size()) != m()) {
        throw std::invalid_argument("PreSample: name lists do not match matrix shapes");
    }
    if (static_cast<int>(column_scales.size()) != m()) {
        throw std::invalid_argument("PreSample: column_scales must have one entry per covariate");
    }
    for (double s : column_scales) {
        if (!(s > 0.0)) throw std::invalid_argument("PreSample: column scales must be positive");
    }
    if (!cost_column_of.empty() && static_cast<int>(cost_column_of.size()) != m()) {
        throw std::invalid_argument("PreSample: cost_column_of must have one entry per covariate");
    }
    if (equations < 1) throw std::invalid_argument("PreSample: equations must be >= 1");
}

void GroupSpec::validate(int m) const {
    if (groups.empty()) throw std::invalid_argument("GroupSpec: no groups defined");
    auto in_range = [m](int j) { return j >= 0 && j < m; };
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("GroupSpec: empty group");
        if (!std::is_sorted(g.begin(), g.end())) {
            throw std::invalid_argument("GroupSpec: group indices must be sorted");
        }
        if (std::adjacent_find(g.begin(), g.end()) != g.end()) {
            throw std::invalid_argument("GroupSpec: duplicate index within a group");
        }
        for (int j : g) {
            if (!in_range(j)) throw std::invalid_argument("GroupSpec: covariate index out of range");
        }
        for (int f : forced) {
            if (!std::binary_search(g.begin(), g.end(), f)) {
                throw std::invalid_argument("GroupSpec: forced covariate missing from a group");
            }
        }
    }
    for (int f : forced) {
        if (!in_range(f)) throw std::invalid_argument("GroupSpec: forced index out of range");
    }
}

LoadResult load_csv(const std::string& path, const std::vector<std::string>& outcome_columns) {
    if (outcome_columns.empty()) {
        throw std::invalid_argument("load_csv: at least one outcome column required");
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
    std::vector<std::string> header = split_csv_line(line);
    const int width = static_cast<int>(header.size());

    std::vector<int> outcome_idx;
    for (const auto& name : outcome_columns) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw std::runtime_error("load_csv: outcome column '" + name + "' not in header");
        }
        outcome_idx.push_back(static_cast<int>(it - header.begin()));
    }
    std::set<int> outcome_set(outcome_idx.begin(), outcome_idx.end());
    if (outcome_set.size() != outcome_idx.size()) {
        throw std::invalid_argument("load_csv: duplicate outcome column request");
    }

    LoadReport report;
    std::vector<std::vector<double>> rows;
    int row_number = 0;  // 1-based over data rows
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_number;
        std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != width) {
            report.dropped_rows.push_back(row_number);
            continue;
        }
        std::vector<double> parsed(width);
        bool complete = true;
        for (int j = 0; j < width && complete; ++j) {
            complete = parse_number(cells[j], parsed[j]);
        }
        if (!complete) {
            report.dropped_rows.push_back(row_number);
            continue;
        }
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: no complete rows in " + path);

    const int n = static_cast<int>(rows.size());
    if (n < 2) throw std::runtime_error("load_csv: fewer than two complete rows in " + path);

    PreSample s;
    s.outcomes.resize(n, static_cast<int>(outcome_idx.size()));
    for (int k = 0; k < static_cast<int>(outcome_idx.size()); ++k) {
        s.outcome_names.push_back(header[outcome_idx[k]]);
        for (int i = 0; i < n; ++i) s.outcomes(i, k) = rows[i][outcome_idx[k]];
    }

    // Candidate covariates: every non-outcome column, minus those with
    // (divisor-N) variance below tolerance.
    std::vector<int> cov_idx;
    for (int j = 0; j < width; ++j) {
        if (!outcome_set.count(j)) cov_idx.push_back(j);
    }
    std::vector<int> kept;
    for (int j : cov_idx) {
        Eigen::VectorXd col(n);
        for (int i = 0; i < n; ++i) col(i) = rows[i][j];
        if (column_variance(col) < kZeroVarianceTol) {
            report.dropped_columns.push_back(header[j]);
        } else {
            kept.push_back(j);
        }
    }
    s.covariates.resize(n, static_cast<int>(kept.size()));
    for (int k = 0; k < static_cast<int>(kept.size()); ++k) {
        s.covariate_names.push_back(header[kept[k]]);
        for (int i = 0; i < n; ++i) s.covariates(i, k) = rows[i][kept[k]];
    }
    s.column_scales.assign(kept.size(), 1.0);
    s.validate();
    return LoadResult{std::move(s), std::move(report)};
}

void save_csv(const PreSample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path);
    char buf[64];

    for (int k = 0; k < sample.l(); ++k) {
        if (k) out << ',';
        out << sample.outcome_names[k];
    }
    for (int j = 0; j < sample.m(); ++j) out << ',' << sample.covariate_names[j];
    out << '\n';

    auto emit = [&](double v, bool lead_comma) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        if (lead_comma) out << ',';
        out << buf;
    };
    for (int i = 0; i < sample.n(); ++i) {
        for (int k = 0; k < sample.l(); ++k) emit(sample.outcomes(i, k), k > 0);
        for (int j = 0; j < sample.m(); ++j) emit(sample.covariates(i, j), true);
        out << '\n';
    }
}

PreSample studentize(const PreSample& sample) {
    sample.validate();
    PreSample out = sample;
    const double n = static_cast<double>(sample.n());
    for (int j = 0; j < sample.m(); ++j) {
        Eigen::VectorXd col = out.covariates.col(j);
        const double var = (col.array() - col.mean()).square().sum() / n;
        if (var < kZeroVarianceTol) {
            throw std::invalid_argument("studentize: zero-variance column '" +
                                        sample.covariate_names[j] + "'");
        }
        const double sd = std::sqrt(var);
        out.covariates.col(j) /= sd;
        out.column_scales[j] = sample.column_scales[j] * sd;
    }
    out.studentized = true;
    return out;
}

GroupSpec define_groups(const PreSample& sample,
                        const std::optional<std::vector<std::vector<int>>>& grouping,
                        const std::vector<int>& forced) {
    const int m = sample.m();
    GroupSpec spec;
    spec.forced = forced;
    std::sort(spec.forced.begin(), spec.forced.end());
    spec.forced.erase(std::unique(spec.forced.begin(), spec.forced.end()), spec.forced.end());
    for (int f : spec.forced) {
        if (f < 0 || f >= m) throw std::invalid_argument("define_groups: forced index out of range");
    }

    std::vector<std::vector<int>> raw;
    if (grouping.has_value()) {
        raw = *grouping;
        if (raw.empty()) throw std::invalid_argument("define_groups: empty grouping");
    } else {
        raw.reserve(m);
        for (int j = 0; j < m; ++j) raw.push_back({j});
    }

    for (auto& g : raw) {
        if (g.empty()) throw std::invalid_argument("define_groups: empty group");
        for (int j : g) {
            if (j < 0 || j >= m) throw std::invalid_argument("define_groups: index out of range");
        }
        g.insert(g.end(), spec.forced.begin(), spec.forced.end());
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        spec.groups.push_back(std::move(g));
    }
    spec.validate(m);
    return spec;
}

std::pair<PreSample, GroupSpec> stack_multivariate(const PreSample& sample, const GroupSpec& groups) {
    sample.validate();
    groups.validate(sample.m());
    const int n = sample.n(), m = sample.m(), l = sample.l();
    if (l < 2) throw std::invalid_argument("stack_multivariate: needs at least two outcomes");

    PreSample out;
    out.outcomes.resize(n * l, 1);
    for (int k = 0; k < l; ++k) out.outcomes.block(n * k, 0, n, 1) = sample.outcomes.col(k);
    out.outcome_names = {"stacked"};
    out.equations = l;

    // Equation k occupies rows [n*k, n*(k+1)) and columns [m*k, m*(k+1)).
    out.covariates = Eigen::MatrixXd::Zero(n * l, m * l);
    out.covariate_names.resize(m * l);
    out.column_scales.resize(m * l);
    out.cost_column_of.resize(m * l);
    for (int k = 0; k < l; ++k) {
        out.covariates.block(n * k, m * k, n, m) = sample.covariates;
        for (int j = 0; j < m; ++j) {
            out.covariate_names[m * k + j] = sample.covariate_names[j] + ":" + sample.outcome_names[k];
            out.column_scales[m * k + j] = sample.column_scales[j];
            out.cost_column_of[m * k + j] =
                sample.cost_column_of.empty() ? j : sample.cost_column_of[j];
        }
    }
    out.studentized = sample.studentized;

    GroupSpec stacked;
    auto expand = [&](const std::vector<int>& g) {
        std::vector<int> e;
        e.reserve(g.size() * l);
        for (int k = 0; k < l; ++k) {
            for (int j : g) e.push_back(m * k + j);
        }
        std::sort(e.begin(), e.end());
        return e;
    };
    for (const auto& g : groups.groups) stacked.groups.push_back(expand(g));
    stacked.forced = expand(groups.forced);
    stacked.validate(m * l);
    out.validate();
    return {std::move(out), std::move(stacked)};
}

}  // namespace surveyopt
