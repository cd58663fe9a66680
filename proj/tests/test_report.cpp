#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "surveyopt/report.hpp"

namespace so = surveyopt;
using nlohmann::json;

TEST_CASE("fnv1a-64 known vectors") {
    CHECK(so::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(so::fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(so::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("hash_file matches in-memory hash") {
    const std::string path = "test_report_hash.tmp";
    const std::string contents = "size,price\n120,1.5\n";
    so::write_text_file(path, contents);
    CHECK(so::hash_file(path) == so::fnv1a_hex(contents));
    std::remove(path.c_str());
    CHECK_THROWS(so::hash_file(path));
}

TEST_CASE("write_text_file writes exact bytes and reports failures") {
    const std::string path = "test_report_write.tmp";
    const std::string contents = "line1\nline2\n";
    so::write_text_file(path, contents);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == contents);
    std::remove(path.c_str());
    CHECK_THROWS(so::write_text_file("no-such-dir-xyz/out.txt", "x"));
}

TEST_CASE("render_json is sorted, 2-space indented, newline terminated") {
    json j;
    j["b"] = 1;
    j["a"] = 2;
    CHECK(so::render_json(j) == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
    // rendering twice gives the same bytes
    CHECK(so::render_json(j) == so::render_json(j));
}

TEST_CASE("manifest serialization carries no timing") {
    so::RunManifest m;
    m.command = "surveyopt design --data d.csv";
    m.input_hashes = {{"d.csv", "00ff"}};
    m.config = json{{"budget", 2000.0}};
    m.seed = 42;
    json j = so::manifest_to_json(m);
    CHECK(j.size() == 5);
    CHECK(j["command"] == "surveyopt design --data d.csv");
    CHECK(j["input_hashes"]["d.csv"] == "00ff");
    CHECK(j["config"]["budget"] == 2000.0);
    CHECK(j["seed"] == 42);
    CHECK(j["version"] == std::string(so::kToolVersion));
    CHECK(!j.contains("timing"));
    CHECK(!j.contains("elapsed"));
}

namespace {

so::PreSample named_sample() {
    so::PreSample s;
    s.covariate_names = {"alpha", "beta", "gamma"};
    s.outcome_names = {"y"};
    return s;
}

so::Selection flat_selection() {
    so::Selection sel;
    sel.size = so::SizeChoice::Individuals(120);
    sel.selected_indices = {0, 2};
    sel.criterion = 0.04;
    sel.cost = 360.0;
    sel.cost_over_budget = 0.9;
    sel.path.push_back({1, 0, 5.0});
    sel.path.push_back({2, 1, 2.5});
    return sel;
}

}  // namespace

TEST_CASE("selection serialization") {
    so::PreSample s = named_sample();
    json j = so::selection_to_json(flat_selection(), s, 400.0);
    CHECK(j["n"] == 120);
    CHECK(!j.contains("clusters"));
    CHECK(j["selected"] == json::array({"alpha", "gamma"}));
    CHECK(j["rmse"].get<double>() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(j["cost"] == 360.0);
    CHECK(j["budget"] == 400.0);
    CHECK(j["path"].size() == 2);
    CHECK(j["path"][1]["group"] == 1);
    CHECK(j["path"][1]["rss"] == 2.5);
    CHECK(!j.contains("lambda"));          // greedy fits carry no penalty
    CHECK(!j.contains("bisection_iters"));

    so::Selection lasso = flat_selection();
    lasso.size = so::SizeChoice::Clusters(12, 30);
    lasso.lambda = 0.25;
    lasso.bisection_iterations = 7;
    json j2 = so::selection_to_json(lasso, s, 400.0);
    CHECK(j2["n"] == 360);
    CHECK(j2["clusters"] == json::array({12, 30}));
    CHECK(j2["lambda"] == 0.25);
    CHECK(j2["bisection_iters"] == 7);
}

TEST_CASE("design comparison CSV bytes") {
    so::DesignReport r;
    r.method = "oga";
    r.selection.size = so::SizeChoice::Individuals(100);
    r.selection.selected_indices = {0, 1, 2};
    r.selection.cost_over_budget = 0.5;
    r.rmse = 0.125;
    r.eqb = 1234.5;
    r.relative_eqb = 0.75;
    const std::string want =
        "method,n,k,cost_over_budget,rmse,eqb,relative_eqb\n"
        "oga,100,3,0.5,0.125,1234.5,0.75\n";
    CHECK(so::design_comparison_csv({r}) == want);
}

TEST_CASE("design report json shape") {
    so::DesignReport r;
    r.method = "lasso";
    r.selection = flat_selection();
    r.rmse = std::sqrt(r.selection.criterion);
    r.eqb = 350.0;
    r.relative_eqb = 0.875;
    so::RunManifest m;
    m.command = "cmd";
    json j = so::design_report_to_json({r}, named_sample(), 400.0, m);
    CHECK(j["budget"] == 400.0);
    REQUIRE(j["methods"].size() == 1);
    CHECK(j["methods"][0]["method"] == "lasso");
    CHECK(j["methods"][0]["n"] == 120);
    CHECK(j["methods"][0]["k"] == 2);
    CHECK(j["methods"][0]["selection"]["selected"].size() == 2);
    CHECK(j["manifest"]["command"] == "cmd");
}

TEST_CASE("monte carlo CSV bytes and float round trip") {
    so::McRow r;
    r.scale = 0.5;
    r.method = "lasso";
    r.n_hat = 250;
    r.k_hat = 2.5;
    r.cost_over_budget = 1;
    r.rmse_criterion = 0.0625;
    r.bias = -0.03125;
    r.sd = 0.25;
    r.rmse_beta = 0.25;
    r.eqb = 2000;
    const std::string want =
        "scale,method,n_hat,k_hat,cost_over_budget,rmse_criterion,bias,sd,rmse_beta,eqb\n"
        "0.5,lasso,250,2.5,1,0.0625,-0.03125,0.25,0.25,2000\n";
    CHECK(so::mc_rows_csv({r}) == want);

    // %.17g is round-trip exact for doubles with no closed decimal form
    so::McRow irr;
    irr.method = "oga";
    irr.bias = 1.0 / 3.0;
    irr.sd = std::sqrt(2.0);
    irr.eqb = 0.1 + 0.2;
    std::string csv = so::mc_rows_csv({irr});
    std::string line = csv.substr(csv.find('\n') + 1);
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    REQUIRE(cells.size() == 10);
    CHECK(std::strtod(cells[6].c_str(), nullptr) == 1.0 / 3.0);
    CHECK(std::strtod(cells[7].c_str(), nullptr) == std::sqrt(2.0));
    CHECK(std::strtod(cells[9].c_str(), nullptr) == 0.1 + 0.2);
}

TEST_CASE("kfold report json") {
    so::KfoldReport rep;
    rep.method = so::Method::post_lasso;
    rep.folds = 2;
    rep.avg_n = 110.0;
    rep.avg_k = 1.5;
    rep.avg_cost_over_budget = 0.95;
    rep.avg_rmse = 0.2;
    rep.avg_eqb = std::numeric_limits<double>::quiet_NaN();
    so::FoldResult f;
    f.fold = 1;
    f.budget = 180.0;
    f.n_hat = 100;
    f.k_hat = 2;
    f.cost_over_budget = 0.9;
    f.rmse = 0.19;
    f.eqb = std::numeric_limits<double>::quiet_NaN();
    rep.per_fold = {f};
    so::RunManifest m;
    json j = so::kfold_report_to_json(rep, m);
    CHECK(j["method"] == "post-lasso");
    CHECK(j["folds"] == 2);
    CHECK(j["avg"]["n"] == 110.0);
    CHECK(std::isnan(j["avg"]["eqb"].get<double>()));
    CHECK(so::render_json(j["avg"]).find("\"eqb\": null") != std::string::npos);
    REQUIRE(j["per_fold"].size() == 1);
    CHECK(j["per_fold"][0]["fold"] == 1);
    CHECK(j["per_fold"][0]["budget"] == 180.0);
}

TEST_CASE("console table header") {
    so::DesignReport r;
    r.method = "post-lasso";
    r.selection = flat_selection();
    r.rmse = 0.2;
    r.eqb = 350.0;
    r.relative_eqb = 0.875;
    std::string table = so::design_comparison_table({r});
    CHECK(table.rfind("method       n       k   cost/B     rmse          eqb   rel.eqb\n", 0) == 0);
    CHECK(table.find("post-lasso") != std::string::npos);
    CHECK(table.find("0.2000") != std::string::npos);  // rmse at 6 digits -> 0.200000
}

TEST_CASE("method names round trip") {
    CHECK(so::method_name(so::Method::oga) == "oga");
    CHECK(so::method_name(so::Method::lasso) == "lasso");
    CHECK(so::method_name(so::Method::post_lasso) == "post-lasso");
    CHECK(so::method_from_name("oga") == so::Method::oga);
    CHECK(so::method_from_name("post-lasso") == so::Method::post_lasso);
    CHECK_THROWS(so::method_from_name("ridge"));
}
