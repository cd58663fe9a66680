#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "oracles.hpp"
#include "surveyopt/cost.hpp"
#include "surveyopt/data.hpp"
#include "surveyopt/oga.hpp"

namespace so = surveyopt;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "surveyopt_test_data";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path);
    out << contents;
}

}  // namespace

TEST_CASE("load_csv drops incomplete rows and zero-variance columns") {
    auto path = temp_file("basic.csv");
    write_file(path,
               "y,a,b,const\n"
               "1,2,3,7\n"
               "2,,4,7\n"      // empty cell: dropped (row 2)
               "3,5,xx,7\n"    // non-numeric: dropped (row 3)
               "4,6,5,7\n"
               "5,8,6,7\n");
    so::LoadResult r = so::load_csv(path.string(), {"y"});
    CHECK(r.sample.n() == 3);
    CHECK(r.sample.l() == 1);
    CHECK(r.sample.m() == 2);  // "const" has zero variance
    CHECK(r.report.dropped_rows == std::vector<int>{2, 3});
    CHECK(r.report.dropped_columns == std::vector<std::string>{"const"});
    CHECK(r.sample.covariate_names == std::vector<std::string>{"a", "b"});
    CHECK(r.sample.outcomes(0, 0) == 1.0);
    CHECK(r.sample.covariates(2, 1) == 6.0);
}

TEST_CASE("load_csv errors") {
    auto path = temp_file("errs.csv");
    write_file(path, "y,a\n1,2\n3,4\n");
    CHECK_THROWS(so::load_csv(path.string(), {"missing"}));
    CHECK_THROWS(so::load_csv(path.string(), {}));
    CHECK_THROWS(so::load_csv("/nonexistent/file.csv", {"y"}));
}

TEST_CASE("studentize rescales (0,4) to (0,2) with scale 2") {
    so::PreSample s;
    s.outcomes = Eigen::VectorXd::LinSpaced(2, 1.0, 2.0);
    s.covariates.resize(2, 1);
    s.covariates << 0.0, 4.0;
    s.outcome_names = {"y"};
    s.covariate_names = {"a"};
    s.column_scales = {1.0};

    so::PreSample t = so::studentize(s);
    CHECK(t.studentized);
    CHECK(t.covariates(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(t.covariates(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(t.column_scales[0] == doctest::Approx(2.0).epsilon(1e-15));
    // outcomes untouched
    CHECK(t.outcomes(1, 0) == 2.0);

    // idempotent: already unit variance, scales keep the total divisor
    so::PreSample t2 = so::studentize(t);
    CHECK((t2.covariates - t.covariates).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(t2.column_scales[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("save_csv then load_csv is a fixed point") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(7, 3);
    Eigen::VectorXd y(7);
    for (int i = 0; i < 7; ++i) {
        y(i) = normal(rng);
        for (int j = 0; j < 3; ++j) x(i, j) = normal(rng);
    }
    so::PreSample s = oracles::make_sample(x, y);
    auto path = temp_file("roundtrip.csv");
    so::save_csv(s, path.string());
    so::LoadResult r = so::load_csv(path.string(), {"y"});
    CHECK(r.report.dropped_rows.empty());
    CHECK(r.sample.covariate_names == s.covariate_names);
    CHECK((r.sample.covariates - s.covariates).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.sample.outcomes - s.outcomes).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("define_groups defaults to singletons and unions forced into every group") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd x = oracles::orthonormal_columns(20, 4, rng);
    so::PreSample s = oracles::make_sample(x, x.col(0));

    so::GroupSpec g = so::define_groups(s, std::nullopt, {});
    CHECK(g.count() == 4);
    CHECK(g.groups[2] == std::vector<int>{2});

    so::GroupSpec gf = so::define_groups(s, std::nullopt, {3, 1, 3});
    CHECK(gf.forced == std::vector<int>{1, 3});
    for (const auto& grp : gf.groups) {
        CHECK(std::binary_search(grp.begin(), grp.end(), 1));
        CHECK(std::binary_search(grp.begin(), grp.end(), 3));
    }
    CHECK(gf.groups[0] == std::vector<int>{0, 1, 3});

    so::GroupSpec gc = so::define_groups(s, std::vector<std::vector<int>>{{0, 2}, {1}}, {1});
    CHECK(gc.groups[0] == std::vector<int>{0, 1, 2});
    CHECK(gc.groups[1] == std::vector<int>{1});

    CHECK_THROWS(so::define_groups(s, std::nullopt, {9}));
    CHECK_THROWS(so::define_groups(s, std::vector<std::vector<int>>{}, {}));
}

TEST_CASE("stack_multivariate block layout") {
    const int n = 3, m = 2, l = 2;
    so::PreSample s;
    s.outcomes.resize(n, l);
    s.outcomes << 1, 10, 2, 20, 3, 30;
    s.covariates.resize(n, m);
    s.covariates << 1, 4, 2, 5, 3, 6;
    s.outcome_names = {"u", "v"};
    s.covariate_names = {"a", "b"};
    s.column_scales = {1.0, 1.0};

    so::GroupSpec g = so::define_groups(s, std::vector<std::vector<int>>{{0}, {0, 1}}, {});
    auto [st, sg] = so::stack_multivariate(s, g);

    CHECK(st.n() == n * l);
    CHECK(st.m() == m * l);
    CHECK(st.l() == 1);
    CHECK(st.equations == 2);
    // outcome: u block then v block
    CHECK(st.outcome()(2) == 3.0);
    CHECK(st.outcome()(3) == 10.0);
    // equation k occupies columns [m*k, m*(k+1)): covariate j of equation k
    // sits in column m*k + j, zero elsewhere
    CHECK(st.covariates(0, 0) == 1.0);
    CHECK(st.covariates(0, 2) == 0.0);
    CHECK(st.covariates(n + 1, 2) == 2.0);
    CHECK(st.covariates(n + 1, 0) == 0.0);
    CHECK(st.cost_column_of == std::vector<int>{0, 1, 0, 1});
    CHECK(st.covariate_names[2] == "a:v");
    // groups expand to the union of their per-equation copies
    CHECK(sg.groups[0] == std::vector<int>{0, 2});
    CHECK(sg.groups[1] == std::vector<int>{0, 1, 2, 3});

    so::PreSample single = oracles::make_sample(s.covariates, s.outcomes.col(0));
    CHECK_THROWS(so::stack_multivariate(single, g));
    CHECK_THROWS(s.outcome());
}

TEST_CASE("duplicated outcome: stacked criterion equals unstacked") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal;
    const int n = 60, m = 3;
    Eigen::MatrixXd x = oracles::orthonormal_columns(n, m, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = 1.5 * x(i, 0) + 0.5 * x(i, 1) + 0.3 * normal(rng);

    so::PreSample flat_sample = oracles::make_sample(x, y);
    so::GroupSpec flat_groups = so::define_groups(flat_sample, std::nullopt, {});

    so::PreSample dup;
    dup.outcomes.resize(n, 2);
    dup.outcomes.col(0) = y;
    dup.outcomes.col(1) = y;
    dup.covariates = x;
    dup.outcome_names = {"y", "ycopy"};
    dup.covariate_names = flat_sample.covariate_names;
    dup.column_scales.assign(m, 1.0);
    auto [stacked, stacked_groups] = so::stack_multivariate(dup, flat_groups);

    so::CostModel model{so::FlatCost{1.0}};
    so::SizeGrid grid = so::SizeGrid::individuals(20, 60, 20);
    const double budget = 120.0;  // admits two covariates at n = 60

    so::DesignResult a = so::oga_design(flat_sample, flat_groups, model, budget, grid);
    so::DesignResult b = so::oga_design(stacked, stacked_groups, model, budget, grid);
    CHECK(a.best.size.effective_n() == b.best.size.effective_n());
    CHECK(a.best.criterion == doctest::Approx(b.best.criterion).epsilon(1e-12));
    // selected cost columns agree after translating the stacked indices
    auto bits_a = so::selection_bits(a.best.selected_indices, m, flat_sample.cost_column_of);
    auto bits_b = so::selection_bits(b.best.selected_indices, m, stacked.cost_column_of);
    CHECK(bits_a == bits_b);
}

TEST_CASE("validate rejects malformed samples") {
    so::PreSample s;
    s.outcomes.resize(3, 1);
    s.outcomes << 1, 2, 3;
    s.covariates.resize(2, 1);
    s.covariates << 1, 2;
    s.outcome_names = {"y"};
    s.covariate_names = {"a"};
    s.column_scales = {1.0};
    CHECK_THROWS(s.validate());

    s.covariates.resize(3, 1);
    s.covariates << 1, 2, 3;
    s.column_scales = {1.0, 2.0};
    CHECK_THROWS(s.validate());
    s.column_scales = {-1.0};
    CHECK_THROWS(s.validate());
    s.column_scales = {1.0};
    s.validate();
}
