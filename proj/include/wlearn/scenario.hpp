#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wlearn/bayes.hpp"
#include "wlearn/dist.hpp"
#include "wlearn/metrics.hpp"
#include "wlearn/prospective.hpp"

namespace wlearn {

enum class ScenarioKind { retrospective, prospective, compare };

struct ProspectiveConfig {
    Distribution1D consensus;
    Distribution1D pioneer;
    std::vector<double> weights;
    std::vector<std::size_t> ns;
    double sigma;
    std::size_t replicates = 10000;
};

/// A compare-table entry: a posterior given directly or produced by a study.
using PosteriorSpec = std::variant<Distribution1D, Study>;

struct Scenario {
    ScenarioKind kind;
    std::optional<Distribution1D> prior;
    std::vector<Study> studies;
    std::vector<PosteriorSpec> posteriors;
    std::optional<ProspectiveConfig> prospective;
    std::uint64_t seed = 0;
    std::optional<GridConfig> grid;
};

// JSON literals. Parsers throw ValidationError whose message starts with the
// offending JSON path, e.g. "$.studies[1].std_error: ...".
Distribution1D parse_distribution(const nlohmann::json& j, const std::string& path = "$");
nlohmann::json to_json(const Distribution1D& d);

Study parse_study(const nlohmann::json& j, const std::string& path = "$");
nlohmann::json to_json(const Study& s);

SamplingModel parse_sampling_model(const nlohmann::json& j, const std::string& path = "$");
nlohmann::json to_json(const SamplingModel& m);

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& file);
nlohmann::json to_json(const Scenario& s);

std::string to_string(ScenarioKind kind);

// Report emission.
nlohmann::json to_json(const LearningReport& r);
std::string report_csv_header();
std::string report_csv_row(const LearningReport& r);

std::string curve_csv(const std::vector<CurvePoint>& points);

/// Shortest round-trip decimal form of a double.
std::string format_number(double x);

}  // namespace wlearn
