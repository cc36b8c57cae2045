#include "wlearn/commands.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "wlearn/errors.hpp"

namespace wlearn {

using nlohmann::json;

namespace {

void require_kind(const Scenario& s, ScenarioKind kind) {
    if (s.kind != kind) {
        throw ValidationError("$.kind: expected " + to_string(kind) + ", got " + to_string(s.kind));
    }
}

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

std::string fixed(const std::optional<double>& x, int digits) {
    return x ? fixed(*x, digits) : std::string("-");
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : std::string(width - s.size(), ' ') + s;
}

std::string short_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

bool show_w2(MetricSelection m) { return m == MetricSelection::w2 || m == MetricSelection::all; }
bool show_kl(MetricSelection m) { return m == MetricSelection::kl || m == MetricSelection::all; }
bool show_lindley(MetricSelection m) {
    return m == MetricSelection::lindley || m == MetricSelection::all;
}

std::string report_columns_header(MetricSelection m) {
    std::string out;
    if (show_w2(m)) out += pad("W2", 10) + pad("dmean^2", 10) + pad("dsd^2", 10) + pad("W2/sd0", 10);
    if (show_kl(m)) out += pad("KL_sym", 10);
    if (show_lindley(m)) out += pad("|Lindley|", 10);
    return out;
}

std::string report_columns(const LearningReport& r, MetricSelection m) {
    std::string out;
    if (show_w2(m)) {
        out += pad(fixed(r.w2, 3), 10) + pad(fixed(r.mean_shift_sq, 2), 10) +
               pad(fixed(r.sd_shift_sq, 2), 10) + pad(fixed(r.normalized_w2, 3), 10);
    }
    if (show_kl(m)) out += pad(fixed(r.kl_sym, 3), 10);
    if (show_lindley(m)) {
        out += pad(r.lindley ? fixed(std::abs(*r.lindley), 3) : std::string("-"), 10);
    }
    return out;
}

}  // namespace

std::string describe(const Distribution1D& d) {
    if (const auto* n = std::get_if<NormalDist>(&d)) {
        return "N(" + short_number(n->mu()) + ", " + short_number(n->sigma()) + ")";
    }
    if (const auto* t = std::get_if<TruncatedNormalDist>(&d)) {
        return "TN(" + short_number(t->mu()) + ", " + short_number(t->sigma()) + "; " +
               short_number(t->lower()) + ", " + short_number(t->upper()) + ")";
    }
    const Moments m = moments(d);
    const std::string tag = std::holds_alternative<MixtureDist>(d) ? "mixture" : "grid";
    return tag + "(mean " + short_number(m.mean) + ", sd " + short_number(m.sd) + ")";
}

RetrospectiveResult run_retrospective(const Scenario& scenario) {
    require_kind(scenario, ScenarioKind::retrospective);
    if (!scenario.prior) throw ValidationError("$.prior: missing");
    if (scenario.studies.empty()) throw ValidationError("$.studies: at least one study required");

    RetrospectiveResult r{sequential_update(*scenario.prior, scenario.studies, scenario.grid), {},
                          {}, 0.0};
    for (std::size_t k = 0; k < r.chain.steps.size(); ++k) {
        r.steps.push_back(learning_report(r.chain.before(k), r.chain.steps[k].posterior));
        r.stepwise_w2_sum += r.steps.back().w2;
    }
    r.cumulative = learning_report(r.chain.prior, r.chain.final_posterior());
    return r;
}

std::vector<CompareRow> run_compare(const Scenario& scenario) {
    require_kind(scenario, ScenarioKind::compare);
    if (!scenario.prior) throw ValidationError("$.prior: missing");
    std::vector<CompareRow> rows;
    for (const auto& spec : scenario.posteriors) {
        Distribution1D post = std::holds_alternative<Study>(spec)
                                  ? update(*scenario.prior, std::get<Study>(spec), scenario.grid)
                                  : std::get<Distribution1D>(spec);
        LearningReport report = learning_report(*scenario.prior, post);
        rows.push_back({describe(post), std::move(post), report});
    }
    return rows;
}

std::vector<CurvePoint> run_prospective(const Scenario& scenario, unsigned threads) {
    require_kind(scenario, ScenarioKind::prospective);
    if (!scenario.prospective) throw ValidationError("$.prospective: missing");
    const auto& cfg = *scenario.prospective;
    const PioneerSetup setup{cfg.consensus, cfg.pioneer, 0.0, SamplingModel(cfg.sigma, 1)};
    McOptions options;
    options.replicates = cfg.replicates;
    options.seed = scenario.seed;
    options.threads = threads;
    return weight_sweep(setup, cfg.weights, cfg.ns, options);
}

std::string render_text(const RetrospectiveResult& r, MetricSelection metrics) {
    std::ostringstream out;
    out << "prior " << describe(r.chain.prior) << "\n\n";
    out << pad("step", 5) << pad("study", 18) << pad("posterior", 32) << report_columns_header(metrics)
        << '\n';
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
        const auto& st = r.chain.steps[k];
        out << pad(std::to_string(k + 1), 5)
            << pad(short_number(st.study.estimate) + " (" + short_number(st.study.std_error) + ")", 18)
            << pad(describe(st.posterior), 26) << report_columns(r.steps[k], metrics) << '\n';
    }
    out << pad("all", 5) << pad("", 18) << pad(describe(r.chain.final_posterior()), 26)
        << report_columns(r.cumulative, metrics) << '\n';
    out << "\nsum of stepwise W2 " << fixed(r.stepwise_w2_sum, 3) << " vs end-to-end W2 "
        << fixed(r.cumulative.w2, 3)
        << (r.stepwise_w2_sum >= r.cumulative.w2 ? " (stepwise >= end-to-end)" : "") << '\n';
    return out.str();
}

std::string render_csv(const RetrospectiveResult& r) {
    std::ostringstream out;
    out << "step,post_mean,post_sd," << report_csv_header() << '\n';
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
        const Moments m = moments(r.chain.steps[k].posterior);
        out << (k + 1) << ',' << format_number(m.mean) << ',' << format_number(m.sd) << ','
            << report_csv_row(r.steps[k]) << '\n';
    }
    const Moments m = moments(r.chain.final_posterior());
    out << "total," << format_number(m.mean) << ',' << format_number(m.sd) << ','
        << report_csv_row(r.cumulative) << '\n';
    return out.str();
}

json render_json(const RetrospectiveResult& r) {
    json steps = json::array();
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
        steps.push_back({{"study", to_json(r.chain.steps[k].study)},
                         {"posterior", to_json(r.chain.steps[k].posterior)},
                         {"report", to_json(r.steps[k])}});
    }
    return {{"prior", to_json(r.chain.prior)},
            {"steps", steps},
            {"cumulative", to_json(r.cumulative)},
            {"stepwise_w2_sum", r.stepwise_w2_sum}};
}

std::string render_text(const std::vector<CompareRow>& rows, MetricSelection metrics) {
    std::ostringstream out;
    out << pad("posterior", 32) << report_columns_header(metrics) << '\n';
    for (const auto& row : rows) out << pad(row.label, 32) << report_columns(row.report, metrics) << '\n';
    return out.str();
}

std::string render_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << "posterior," << report_csv_header() << '\n';
    for (const auto& row : rows) out << '"' << row.label << "\"," << report_csv_row(row.report) << '\n';
    return out.str();
}

json render_json(const std::vector<CompareRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        out.push_back({{"posterior", to_json(row.posterior)}, {"report", to_json(row.report)}});
    }
    return out;
}

std::string render_text(const std::vector<CurvePoint>& points) {
    std::ostringstream out;
    out << pad("w", 6) << pad("n", 8) << pad("E[W2]", 12) << pad("mc_se", 12) << '\n';
    for (const auto& p : points) {
        out << pad(fixed(p.w, 2), 6) << pad(std::to_string(p.n), 8)
            << pad(fixed(p.expected_learning, 4), 12) << pad(fixed(p.mc_std_error, 4), 12) << '\n';
    }
    return out.str();
}

json render_json(const std::vector<CurvePoint>& points) {
    json out = json::array();
    for (const auto& p : points) {
        out.push_back({{"w", p.w},
                       {"n", p.n},
                       {"expected_learning", p.expected_learning},
                       {"mc_std_error", p.mc_std_error}});
    }
    return out;
}

}  // namespace wlearn
