#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "wlearn/commands.hpp"
#include "wlearn/errors.hpp"
#include "wlearn/replication.hpp"
#include "wlearn/scenario.hpp"

using namespace wlearn;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
    try {
        parse_scenario(j);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

const json kLawn = json::parse(R"({
  "kind": "retrospective",
  "prior": {"type": "normal", "mu": 0, "sigma": 5},
  "studies": [{"estimate": 2.5, "std_error": 1.7}, {"estimate": -1.4, "std_error": 5.7},
              {"estimate": 1.8, "std_error": 0.9}, {"estimate": -1.2, "std_error": 2.6}]
})");

const json kTable3 = json::parse(R"({
  "kind": "compare",
  "prior": {"type": "normal", "mu": 0, "sigma": 10},
  "posteriors": [{"type": "normal", "mu": 5, "sigma": 5}, {"type": "normal", "mu": 5, "sigma": 2.5},
                 {"type": "normal", "mu": 3, "sigma": 5}, {"type": "normal", "mu": 0, "sigma": 1}]
})");

}  // namespace

TEST_CASE("distribution literals round-trip") {
    const std::vector<json> literals{
        json::parse(R"({"type":"normal","mu":0.1,"sigma":5})"),
        json::parse(R"({"type":"trunc_normal","mu":0.2,"sigma":0.4,"lower":0})"),
        json::parse(R"({"type":"trunc_normal","mu":0.2,"sigma":0.4,"lower":-1,"upper":3.5})"),
        json::parse(R"({"type":"mixture","components":[{"weight":0.3,"dist":{"type":"normal","mu":0,"sigma":3}},
                       {"weight":0.7,"dist":{"type":"trunc_normal","mu":1,"sigma":2,"upper":4}}]})"),
        json::parse(R"({"type":"grid","xs":[-1,0,1],"ws":[0.25,0.5,0.25]})")};
    for (const auto& lit : literals) {
        const Distribution1D d = parse_distribution(lit);
        CHECK(to_json(d) == lit);
        CHECK(parse_distribution(to_json(d)) == d);
    }
    CHECK(parse_study(json::parse(R"({"estimate":2.5,"std_error":1.7})")) == Study(2.5, 1.7));
    const SamplingModel m = parse_sampling_model(json::parse(R"({"sigma":1.0,"n":50})"));
    CHECK(m == SamplingModel(1.0, 50));
    CHECK(parse_sampling_model(to_json(m)) == m);
}

TEST_CASE("scenario round-trip") {
    const json prospective = json::parse(R"({
      "kind": "prospective", "seed": 77,
      "prospective": {"consensus": {"type":"normal","mu":3,"sigma":1},
                      "pioneer": {"type":"normal","mu":0,"sigma":3},
                      "weights": [0, 0.35, 1], "ns": [10, 200], "sigma": 1.25, "replicates": 500}
    })");
    json mixed = kTable3;
    mixed["posteriors"].push_back(json::parse(R"({"estimate":6.67,"std_error":5.77})"));
    mixed["grid"] = {{"lo", -60}, {"hi", 60}, {"nodes", 2048}};
    for (const json& j : {kLawn, kTable3, prospective, mixed}) {
        const Scenario a = parse_scenario(j);
        const json once = to_json(a);
        const Scenario b = parse_scenario(once);
        CHECK(to_json(b) == once);
        CHECK(b.kind == a.kind);
        CHECK(b.seed == a.seed);
        CHECK(b.studies == a.studies);
        CHECK(b.posteriors == a.posteriors);
        CHECK(b.prior == a.prior);
        CHECK(b.grid == a.grid);
    }
}

TEST_CASE("validation errors name the path") {
    json j = kLawn;
    j["studies"][1]["std_error"] = 0;
    CHECK(starts_with(error_of(j), "$.studies[1]"));

    j = kLawn;
    j["studies"][2].erase("estimate");
    CHECK(starts_with(error_of(j), "$.studies[2].estimate"));

    j = kLawn;
    j["prior"]["type"] = "cauchy";
    CHECK(starts_with(error_of(j), "$.prior.type"));

    j = kLawn;
    j["studies"] = json::array();
    CHECK(starts_with(error_of(j), "$.studies"));

    j = kLawn;
    j["kind"] = "forecast";
    CHECK(starts_with(error_of(j), "$.kind"));

    j = kLawn;
    j["prior"] = json::parse(R"({"type":"mixture","components":[{"weight":0.5,"dist":{"type":"normal","mu":0,"sigma":1}}]})");
    CHECK(starts_with(error_of(j), "$.prior"));

    j = kLawn;
    j["grid"] = {{"lo", 1}, {"hi", -1}};
    CHECK(starts_with(error_of(j), "$.grid"));

    j = kTable3;
    j["posteriors"][0]["sigma"] = -2;
    CHECK(starts_with(error_of(j), "$.posteriors[0]"));

    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ValidationError);
}

TEST_CASE("retrospective lawn-sign run") {
    const RetrospectiveResult r = run_retrospective(parse_scenario(kLawn));
    REQUIRE(r.steps.size() == 4);
    const double published[] = {4.0, 0.3, 0.8, 0.3};
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(r.steps[k].w2 - published[k]) <= 0.15);
    CHECK(std::abs(r.cumulative.w2 - 4.6) <= 0.1);
    CHECK(r.stepwise_w2_sum > r.cumulative.w2);

    const std::string csv = render_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    const json out = render_json(r);
    CHECK(out.contains("steps"));
    CHECK(!render_text(r, MetricSelection::all).empty());

    json single = kLawn;
    single["prior"] = {{"type", "normal"}, {"mu", 0}, {"sigma", 10}};
    single["studies"] = json::array({{{"estimate", 6.67}, {"std_error", 5.77}}});
    CHECK(std::abs(run_retrospective(parse_scenario(single)).cumulative.w2 - 7.07) < 0.01);

    Scenario empty = parse_scenario(kLawn);
    empty.studies.clear();
    CHECK_THROWS_AS(run_retrospective(empty), ValidationError);
    CHECK_THROWS_AS(run_compare(parse_scenario(kLawn)), ValidationError);
}

TEST_CASE("compare table") {
    const auto rows = run_compare(parse_scenario(kTable3));
    REQUIRE(rows.size() == 4);
    const double w2[] = {7.1, 9.0, 5.8, 9.0};
    const double kl[] = {1.75, 9.16, 1.35, 49};
    // Second row: sd ratio 4 gives ln 4 = 1.386, not the printed 1.37.
    const double lindley[] = {0.69, std::log(4.0), 0.69, 2.3};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(rows[i].report.w2 - w2[i]) <= 0.05);
        CHECK(std::abs(*rows[i].report.kl_sym - kl[i]) <= 0.02);
        CHECK(std::abs(std::abs(*rows[i].report.lindley) - lindley[i]) <= 0.01);
    }
    CHECK(rows[0].label == "N(5, 5)");

    json same = kTable3;
    same["posteriors"] = json::array({kTable3["prior"]});
    const auto zero = run_compare(parse_scenario(same));
    CHECK(zero[0].report.w2 == 0.0);
    CHECK(*zero[0].report.kl_sym == 0.0);
    CHECK(*zero[0].report.lindley == 0.0);

    const std::string csv = render_csv(rows);
    CHECK(starts_with(csv, "posterior," + report_csv_header()));
}

TEST_CASE("report serialization") {
    CHECK(report_csv_header() ==
          "w2,mean_shift_sq,sd_shift_sq,normalized_w2,kl_forward,kl_reverse,kl_sym,lindley,decomposition_exact");
    LearningReport r;
    r.w2 = 0.5;
    r.decomposition_exact = true;
    const std::string row = report_csv_row(r);
    CHECK(std::count(row.begin(), row.end(), ',') == 8);
    const json j = to_json(r);
    CHECK(j["w2"] == 0.5);
    CHECK(j["kl_sym"].is_null());
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);

    const std::vector<CurvePoint> pts{{0.5, 10, 1.25, 0.01}};
    CHECK(curve_csv(pts) == "w,n,expected_learning,mc_std_error\n0.5,10,1.25,0.01\n");
}

TEST_CASE("prospective scenario") {
    const json j = json::parse(R"({
      "kind": "prospective", "seed": 3,
      "prospective": {"consensus": {"type":"normal","mu":3,"sigma":1},
                      "pioneer": {"type":"normal","mu":0,"sigma":3},
                      "weights": [0, 1], "ns": [10, 50, 200], "sigma": 1, "replicates": 200}
    })");
    const auto a = run_prospective(parse_scenario(j), 1);
    const auto b = run_prospective(parse_scenario(j), 2);
    REQUIRE(a.size() == 6);
    CHECK(curve_csv(a) == curve_csv(b));
    CHECK(a[0].expected_learning > 0.0);
}

TEST_CASE("replication harness") {
    SUBCASE("detects a wrong closed form") {
        ReplicationOptions tampered;
        tampered.only = {1, 3};
        tampered.w2 = [](const NormalDist& a, const NormalDist& b) { return a.sigma() + b.sigma(); };
        const auto results = run_replication(tampered);
        bool any_c1_failure = false;
        for (const auto& r : results) {
            CHECK((r.criterion == 1 || r.criterion == 3));
            if (r.criterion == 1 && !r.passed) any_c1_failure = true;
        }
        CHECK(any_c1_failure);
    }

    SUBCASE("cheap subset passes and is reproducible") {
        ReplicationOptions opt;
        opt.only = {1, 2, 3, 5, 6, 7};
        const auto a = run_replication(opt);
        const auto b = run_replication(opt);
        CHECK(render_replication(a) == render_replication(b));
        for (const auto& r : a) {
            CHECK_MESSAGE(r.passed, r.check_name);
            CHECK(r.passed == (std::abs(r.expected - r.actual) <= r.tolerance));
        }
    }
}
