#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "wlearn/bayes.hpp"
#include "wlearn/metrics.hpp"
#include "wlearn/prospective.hpp"
#include "wlearn/scenario.hpp"

namespace wlearn {

enum class MetricSelection { w2, kl, lindley, all };

struct RetrospectiveResult {
    PosteriorChain chain;
    std::vector<LearningReport> steps;  // before(k) -> posterior k
    LearningReport cumulative;          // prior -> final posterior
    double stepwise_w2_sum = 0.0;
};

struct CompareRow {
    std::string label;
    Distribution1D posterior;
    LearningReport report;
};

RetrospectiveResult run_retrospective(const Scenario& scenario);
std::vector<CompareRow> run_compare(const Scenario& scenario);
std::vector<CurvePoint> run_prospective(const Scenario& scenario, unsigned threads = 0);

/// Compact label such as "N(5, 2.5)".
std::string describe(const Distribution1D& d);

std::string render_text(const RetrospectiveResult& r, MetricSelection metrics);
std::string render_csv(const RetrospectiveResult& r);
nlohmann::json render_json(const RetrospectiveResult& r);

std::string render_text(const std::vector<CompareRow>& rows, MetricSelection metrics);
std::string render_csv(const std::vector<CompareRow>& rows);
nlohmann::json render_json(const std::vector<CompareRow>& rows);

std::string render_text(const std::vector<CurvePoint>& points);
nlohmann::json render_json(const std::vector<CurvePoint>& points);

}  // namespace wlearn
