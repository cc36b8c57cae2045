// wlearn: retrospective and prospective learning metrics from scenario files.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wlearn/commands.hpp"
#include "wlearn/errors.hpp"
#include "wlearn/replication.hpp"
#include "wlearn/scenario.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitNumeric = 2;

struct CommonFlags {
    std::string scenario;
    std::string out;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::optional<double> grid_lo;
    std::optional<double> grid_hi;
    std::optional<std::size_t> grid_nodes;
    std::string metric = "all";
    unsigned threads = 0;
};

wlearn::MetricSelection metric_of(const std::string& s) {
    static const std::map<std::string, wlearn::MetricSelection> table{
        {"w2", wlearn::MetricSelection::w2},
        {"kl", wlearn::MetricSelection::kl},
        {"lindley", wlearn::MetricSelection::lindley},
        {"all", wlearn::MetricSelection::all}};
    return table.at(s);
}

wlearn::Scenario load(const CommonFlags& f) {
    wlearn::Scenario s = wlearn::load_scenario(f.scenario);
    if (f.seed) s.seed = *f.seed;
    if (f.replicates && s.prospective) s.prospective->replicates = *f.replicates;
    if (f.grid_lo || f.grid_hi || f.grid_nodes) {
        if (!s.grid && !(f.grid_lo && f.grid_hi)) {
            throw wlearn::ValidationError("--grid-lo and --grid-hi must be given together");
        }
        wlearn::GridConfig g = s.grid.value_or(wlearn::GridConfig{0.0, 1.0});
        if (f.grid_lo) g.lo = *f.grid_lo;
        if (f.grid_hi) g.hi = *f.grid_hi;
        if (f.grid_nodes) g.nodes = *f.grid_nodes;
        if (!(g.lo < g.hi)) throw wlearn::ValidationError("--grid-lo must be below --grid-hi");
        s.grid = g;
    }
    return s;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wlearn::ValidationError(path + ": cannot open output file");
    out << text;
}

template <class Result>
void emit(const CommonFlags& f, const Result& result, const std::string& text) {
    std::cout << text;
    if (f.out.empty()) return;
    if (f.format == "json") {
        write_out(f.out, wlearn::render_json(result).dump(2) + "\n");
    } else {
        write_out(f.out, wlearn::render_csv(result));
    }
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_scenario) {
    if (with_scenario) cmd->add_option("--scenario", f.scenario, "Scenario JSON file")->required();
    cmd->add_option("--out", f.out, "Write machine-readable output here");
    cmd->add_option("--format", f.format, "Output file format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", f.seed, "Override the scenario seed");
    cmd->add_option("--replicates", f.replicates, "Monte Carlo replicates per curve point");
    cmd->add_option("--grid-lo", f.grid_lo, "Lower end of the update grid");
    cmd->add_option("--grid-hi", f.grid_hi, "Upper end of the update grid");
    cmd->add_option("--grid-nodes", f.grid_nodes, "Number of grid nodes")
        ->check(CLI::Range(static_cast<std::size_t>(64), static_cast<std::size_t>(1) << 24));
    cmd->add_option("--metric", f.metric, "Columns shown in tables")
        ->check(CLI::IsMember({"w2", "kl", "lindley", "all"}));
    cmd->add_option("--threads", f.threads, "Worker threads for Monte Carlo (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning metrics between prior and posterior beliefs"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* retro = app.add_subcommand("retro", "Sequential updating with stepwise and cumulative learning");
    auto* prospect = app.add_subcommand("prospect", "Expected learning sweep over pioneer weights");
    auto* compare = app.add_subcommand("compare", "W2 / KL / Lindley table for a prior and posteriors");
    auto* replicate = app.add_subcommand("replicate-paper", "Run the reference replication checks");
    add_common(retro, flags, true);
    add_common(prospect, flags, true);
    add_common(compare, flags, true);
    replicate->add_option("--out", flags.out, "Write the check report here");
    replicate->add_option("--threads", flags.threads, "Worker threads for Monte Carlo");

    CLI11_PARSE(app, argc, argv);

    try {
        if (retro->parsed()) {
            const auto result = wlearn::run_retrospective(load(flags));
            emit(flags, result, wlearn::render_text(result, metric_of(flags.metric)));
        } else if (compare->parsed()) {
            const auto rows = wlearn::run_compare(load(flags));
            emit(flags, rows, wlearn::render_text(rows, metric_of(flags.metric)));
        } else if (prospect->parsed()) {
            const auto points = wlearn::run_prospective(load(flags), flags.threads);
            std::cout << wlearn::render_text(points);
            if (!flags.out.empty()) {
                write_out(flags.out, flags.format == "json"
                                         ? wlearn::render_json(points).dump(2) + "\n"
                                         : wlearn::curve_csv(points));
            }
        } else if (replicate->parsed()) {
            wlearn::ReplicationOptions options;
            options.threads = flags.threads;
            const auto results = wlearn::run_replication(options);
            const std::string report = wlearn::render_replication(results);
            std::cout << report;
            write_out(flags.out, report);
            for (const auto& r : results) {
                if (!r.passed) return kExitFailure;
            }
        }
    } catch (const wlearn::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
