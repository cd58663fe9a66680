#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "surveyopt/cost.hpp"
#include "surveyopt/sim.hpp"

namespace so = surveyopt;

TEST_CASE("coefficient templates") {
    Eigen::VectorXd zero6 = Eigen::VectorXd::Zero(6);

    Eigen::VectorXd lin = so::make_gamma("lin-sparse", 1.0, zero6);
    REQUIRE(lin.size() == 6);
    CHECK(lin(0) == doctest::Approx(1.5).epsilon(1e-15));   // 0.5 * 3
    CHECK(lin(1) == doctest::Approx(1.3).epsilon(1e-15));   // 0.5 * 2.6
    CHECK(lin(4) == doctest::Approx(0.7).epsilon(1e-15));   // 0.5 * 1.4
    CHECK(lin(5) == 0.0);

    Eigen::VectorXd off = so::make_gamma("lin-sparse", 0.0, zero6);
    CHECK(off.cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd linexp = so::make_gamma("lin-exp", 1.0, Eigen::VectorXd::Zero(7));
    CHECK(linexp(0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(linexp(5) == doctest::Approx(0.5 * std::exp(-6.0)).epsilon(1e-12));
    CHECK(linexp(6) == doctest::Approx(0.5 * std::exp(-7.0)).epsilon(1e-12));

    Eigen::VectorXd ex = so::make_gamma("exp", 2.0, Eigen::VectorXd::Zero(3));
    CHECK(ex(0) == doctest::Approx(0.5 * 2.0 * 10 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(ex(2) == doctest::Approx(0.5 * 2.0 * 10 * std::exp(-3.0)).epsilon(1e-12));

    // nonzero bases shift away from zero in their own sign
    Eigen::VectorXd base(6);
    base << -1, 0, 0, 0, 0, 0;
    Eigen::VectorXd shifted = so::make_gamma("lin-sparse", 1.0, base);
    CHECK(shifted(0) == doctest::Approx(-2.5).epsilon(1e-15));  // -1 - 0.5*3
    CHECK(shifted(1) == doctest::Approx(1.3).epsilon(1e-15));

    CHECK_THROWS(so::make_gamma("unknown", 1.0, zero6));
    CHECK_THROWS(so::make_gamma("lin-sparse", 1.0, Eigen::VectorXd::Zero(4)));  // needs M >= 5
    so::make_gamma("exp", 1.0, Eigen::VectorXd::Zero(2));  // exp spec has no minimum
}

TEST_CASE("simulate_pre is deterministic in (seed, replication)") {
    so::SimConfig c;
    c.n_pre = 40;
    c.base_gamma = Eigen::VectorXd::Zero(6);
    c.seed = 99;
    c.sigma_eps = 1.0;
    Eigen::VectorXd gamma = so::make_gamma("lin-sparse", 0.5, c.base_gamma);

    so::PreSample a = so::simulate_pre(c, gamma, 0);
    so::PreSample b = so::simulate_pre(c, gamma, 0);
    CHECK((a.covariates - b.covariates).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.outcomes - b.outcomes).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.n() == 40);
    CHECK(a.m() == 6);
    CHECK(a.covariate_names[0] == "x1");

    so::PreSample d = so::simulate_pre(c, gamma, 8);
    CHECK((a.covariates - d.covariates).cwiseAbs().maxCoeff() > 0.0);

    so::SimConfig c2 = c;
    c2.seed = 100;
    so::PreSample e = so::simulate_pre(c2, gamma, 0);
    CHECK((a.covariates - e.covariates).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero noise makes the outcome an exact linear function") {
    so::SimConfig c;
    c.n_pre = 30;
    c.base_gamma = Eigen::VectorXd::Zero(5);
    c.sigma_eps = 0.0;
    c.seed = 3;
    Eigen::VectorXd gamma = so::make_gamma("lin-sparse", 1.0, c.base_gamma);
    so::PreSample s = so::simulate_pre(c, gamma, 0);
    CHECK((s.outcome() - s.covariates * gamma).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("resampled covariates come from donor rows") {
    so::SimConfig base;
    base.n_pre = 25;
    base.base_gamma = Eigen::VectorXd::Zero(5);
    base.seed = 7;
    Eigen::VectorXd gamma = so::make_gamma("lin-sparse", 1.0, base.base_gamma);
    so::PreSample donor = so::simulate_pre(base, gamma, 0);

    so::SimConfig c = base;
    c.covariate_source = "resample";
    c.donor = &donor;
    c.n_pre = 60;
    so::PreSample s = so::simulate_pre(c, gamma, 1);
    CHECK(s.n() == 60);
    // every drawn row equals some donor row
    for (int i = 0; i < s.n(); ++i) {
        bool found = false;
        for (int r = 0; r < donor.n() && !found; ++r) {
            found = (s.covariates.row(i) - donor.covariates.row(r)).cwiseAbs().maxCoeff() == 0.0;
        }
        CHECK(found);
    }

    so::SimConfig bad = c;
    bad.donor = nullptr;
    CHECK_THROWS(so::simulate_pre(bad, gamma, 0));
}

TEST_CASE("run_mc rows, determinism, and eqb switches") {
    so::SimConfig c;
    c.spec = "lin-sparse";
    c.scale = 0.6;
    c.base_gamma = Eigen::VectorXd::Zero(6);
    c.n_pre = 80;
    c.grid = so::SizeGrid::individuals(20, 80, 20);
    c.replications = 6;
    c.seed = 11;
    c.compute_eqb = false;
    c.experiment_row = false;
    c.threads = 1;
    so::CostModel flat{so::FlatCost{1.0}};
    const double budget = 120.0;

    std::vector<so::McRow> rows = so::run_mc(c, flat, budget);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].method == "oga");
    CHECK(rows[1].method == "lasso");
    CHECK(rows[2].method == "post-lasso");
    for (const auto& r : rows) {
        CHECK(r.scale == 0.6);
        CHECK(r.n_hat > 0);
        CHECK(std::isfinite(r.bias));
        CHECK(std::isfinite(r.sd));
        CHECK(r.rmse_beta >= std::abs(r.bias) - 1e-12);
        CHECK(std::isnan(r.eqb));  // disabled
    }

    // identical config: identical rows; more threads: identical rows
    std::vector<so::McRow> again = so::run_mc(c, flat, budget);
    so::SimConfig c2 = c;
    c2.threads = 3;
    std::vector<so::McRow> threaded = so::run_mc(c2, flat, budget);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].n_hat == again[i].n_hat);
        CHECK(rows[i].bias == again[i].bias);
        CHECK(rows[i].n_hat == threaded[i].n_hat);
        CHECK(rows[i].k_hat == threaded[i].k_hat);
        CHECK(rows[i].bias == threaded[i].bias);
        CHECK(rows[i].sd == threaded[i].sd);
        CHECK(rows[i].rmse_criterion == threaded[i].rmse_criterion);
    }

    // experiment row: full selection at the experiment size, eqb = its cost
    so::SimConfig ce = c;
    ce.experiment_row = true;
    ce.experiment_n = 50;
    std::vector<so::McRow> with_exp = so::run_mc(ce, flat, budget);
    REQUIRE(with_exp.size() == 4);
    CHECK(with_exp[3].method == "experiment");
    CHECK(with_exp[3].n_hat == 50.0);
    CHECK(with_exp[3].k_hat == 6.0);
    CHECK(with_exp[3].eqb == doctest::Approx(50.0 * 6.0 * 1.0));  // flat cost of the full row

    CHECK_THROWS(so::run_mc(so::SimConfig{}, flat, budget));
}
