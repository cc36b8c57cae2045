#include "wlearn/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "wlearn/errors.hpp"

namespace wlearn {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError(path + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double number_field(const json& j, const std::string& key, const std::string& path) {
    return number(field(j, key, path), path + "." + key);
}

std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

const json& array_field(const json& j, const std::string& key, const std::string& path) {
    const json& a = field(j, key, path);
    if (!a.is_array()) fail(path + "." + key, "expected an array");
    return a;
}

std::vector<double> number_array(const json& j, const std::string& key, const std::string& path) {
    const json& a = array_field(j, key, path);
    std::vector<double> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.push_back(number(a[i], path + "." + key + "[" + std::to_string(i) + "]"));
    }
    return out;
}

// Rethrow constructor validation failures under the literal's path.
template <class F>
auto at_path(const std::string& path, F&& build) -> decltype(build()) {
    try {
        return build();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind("$", 0) == 0) throw;
        fail(path, msg);
    }
}

MixtureComponent parse_component(const json& j, const std::string& path) {
    Distribution1D d = parse_distribution(j, path);
    if (auto* n = std::get_if<NormalDist>(&d)) return *n;
    if (auto* t = std::get_if<TruncatedNormalDist>(&d)) return *t;
    fail(path, "mixture components must be normal or trunc_normal");
}

std::optional<double> optional_bound(const json& j, const std::string& key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return number(*it, path + "." + key);
}

GridConfig parse_grid(const json& j, const std::string& path) {
    GridConfig g{number_field(j, "lo", path), number_field(j, "hi", path), kDefaultGridNodes};
    if (j.contains("nodes")) g.nodes = count(j["nodes"], path + ".nodes");
    if (!(g.lo < g.hi)) fail(path, "lo must be below hi");
    if (g.nodes < kMinGridNodes) fail(path + ".nodes", "at least 64 nodes required");
    return g;
}

}  // namespace

Distribution1D parse_distribution(const json& j, const std::string& path) {
    const json& type_j = field(j, "type", path);
    if (!type_j.is_string()) fail(path + ".type", "expected a string");
    const std::string type = type_j.get<std::string>();

    if (type == "normal") {
        const double mu = number_field(j, "mu", path);
        const double sigma = number_field(j, "sigma", path);
        return at_path(path, [&] { return Distribution1D{NormalDist(mu, sigma)}; });
    }
    if (type == "trunc_normal") {
        const double mu = number_field(j, "mu", path);
        const double sigma = number_field(j, "sigma", path);
        const double lower = optional_bound(j, "lower", path).value_or(-kInf);
        const double upper = optional_bound(j, "upper", path).value_or(kInf);
        return at_path(path,
                       [&] { return Distribution1D{TruncatedNormalDist(mu, sigma, lower, upper)}; });
    }
    if (type == "mixture") {
        const json& comps = array_field(j, "components", path);
        std::vector<WeightedComponent> out;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const std::string p = path + ".components[" + std::to_string(i) + "]";
            out.push_back({number_field(comps[i], "weight", p),
                           parse_component(field(comps[i], "dist", p), p + ".dist")});
        }
        return at_path(path, [&] { return Distribution1D{MixtureDist(std::move(out))}; });
    }
    if (type == "grid") {
        auto xs = number_array(j, "xs", path);
        auto ws = number_array(j, "ws", path);
        return at_path(path, [&] { return Distribution1D{GridDensity(std::move(xs), std::move(ws))}; });
    }
    fail(path + ".type", "unknown distribution type '" + type + "'");
}

json to_json(const Distribution1D& d) {
    if (const auto* n = std::get_if<NormalDist>(&d)) {
        return {{"type", "normal"}, {"mu", n->mu()}, {"sigma", n->sigma()}};
    }
    if (const auto* t = std::get_if<TruncatedNormalDist>(&d)) {
        json out = {{"type", "trunc_normal"}, {"mu", t->mu()}, {"sigma", t->sigma()}};
        if (!std::isinf(t->lower())) out["lower"] = t->lower();
        if (!std::isinf(t->upper())) out["upper"] = t->upper();
        return out;
    }
    if (const auto* m = std::get_if<MixtureDist>(&d)) {
        json comps = json::array();
        for (const auto& c : m->components()) {
            comps.push_back({{"weight", c.weight},
                             {"dist", std::visit([](const auto& v) { return to_json(Distribution1D{v}); },
                                                 c.dist)}});
        }
        return {{"type", "mixture"}, {"components", comps}};
    }
    const auto& g = std::get<GridDensity>(d);
    return {{"type", "grid"},
            {"xs", std::vector<double>(g.xs().begin(), g.xs().end())},
            {"ws", std::vector<double>(g.ws().begin(), g.ws().end())}};
}

Study parse_study(const json& j, const std::string& path) {
    const double est = number_field(j, "estimate", path);
    const double se = number_field(j, "std_error", path);
    return at_path(path, [&] { return Study(est, se); });
}

json to_json(const Study& s) { return {{"estimate", s.estimate}, {"std_error", s.std_error}}; }

SamplingModel parse_sampling_model(const json& j, const std::string& path) {
    const double sigma = number_field(j, "sigma", path);
    const std::size_t n = count(field(j, "n", path), path + ".n");
    return at_path(path, [&] { return SamplingModel(sigma, n); });
}

json to_json(const SamplingModel& m) { return {{"sigma", m.sigma}, {"n", m.n}}; }

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::retrospective: return "retrospective";
        case ScenarioKind::prospective: return "prospective";
        case ScenarioKind::compare: return "compare";
    }
    return "unknown";
}

Scenario parse_scenario(const json& j) {
    const std::string root = "$";
    const json& kind_j = field(j, "kind", root);
    if (!kind_j.is_string()) fail("$.kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();

    Scenario s{};
    if (kind == "retrospective") {
        s.kind = ScenarioKind::retrospective;
    } else if (kind == "prospective") {
        s.kind = ScenarioKind::prospective;
    } else if (kind == "compare") {
        s.kind = ScenarioKind::compare;
    } else {
        fail("$.kind", "expected retrospective, prospective or compare");
    }

    if (j.contains("prior")) s.prior = parse_distribution(j["prior"], "$.prior");
    if (j.contains("seed")) s.seed = count(j["seed"], "$.seed");
    if (j.contains("grid")) s.grid = parse_grid(j["grid"], "$.grid");
    if (j.contains("studies")) {
        const json& a = array_field(j, "studies", root);
        for (std::size_t i = 0; i < a.size(); ++i) {
            s.studies.push_back(parse_study(a[i], "$.studies[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("posteriors")) {
        const json& a = array_field(j, "posteriors", root);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string p = "$.posteriors[" + std::to_string(i) + "]";
            if (a[i].is_object() && a[i].contains("type")) {
                s.posteriors.emplace_back(parse_distribution(a[i], p));
            } else {
                s.posteriors.emplace_back(parse_study(a[i], p));
            }
        }
    }
    if (j.contains("prospective")) {
        const std::string p = "$.prospective";
        const json& pj = j["prospective"];
        ProspectiveConfig cfg{parse_distribution(field(pj, "consensus", p), p + ".consensus"),
                              parse_distribution(field(pj, "pioneer", p), p + ".pioneer"),
                              number_array(pj, "weights", p),
                              {},
                              number_field(pj, "sigma", p),
                              10000};
        for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
            if (!(cfg.weights[i] >= 0.0 && cfg.weights[i] <= 1.0)) {
                fail(p + ".weights[" + std::to_string(i) + "]", "weight must lie in [0, 1]");
            }
        }
        const json& ns = array_field(pj, "ns", p);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const std::string np = p + ".ns[" + std::to_string(i) + "]";
            cfg.ns.push_back(count(ns[i], np));
            if (cfg.ns.back() < 1) fail(np, "n must be at least 1");
        }
        if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) fail(p + ".sigma", "must be > 0");
        if (pj.contains("replicates")) cfg.replicates = count(pj["replicates"], p + ".replicates");
        s.prospective = std::move(cfg);
    }

    switch (s.kind) {
        case ScenarioKind::retrospective:
            if (!s.prior) fail("$.prior", "missing");
            if (s.studies.empty()) fail("$.studies", "at least one study required");
            break;
        case ScenarioKind::compare:
            if (!s.prior) fail("$.prior", "missing");
            if (s.posteriors.empty()) fail("$.posteriors", "at least one posterior required");
            break;
        case ScenarioKind::prospective:
            if (!s.prospective) fail("$.prospective", "missing");
            if (s.prospective->weights.empty()) fail("$.prospective.weights", "empty");
            if (s.prospective->ns.empty()) fail("$.prospective.ns", "empty");
            break;
    }
    return s;
}

Scenario load_scenario(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError(file + ": cannot open scenario file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(file + ": invalid JSON: " + e.what());
    }
    return parse_scenario(j);
}

json to_json(const Scenario& s) {
    json out = {{"kind", to_string(s.kind)}, {"seed", s.seed}};
    if (s.prior) out["prior"] = to_json(*s.prior);
    if (!s.studies.empty()) {
        json a = json::array();
        for (const auto& st : s.studies) a.push_back(to_json(st));
        out["studies"] = a;
    }
    if (!s.posteriors.empty()) {
        json a = json::array();
        for (const auto& p : s.posteriors) {
            a.push_back(std::visit([](const auto& v) { return to_json(v); }, p));
        }
        out["posteriors"] = a;
    }
    if (s.prospective) {
        const auto& p = *s.prospective;
        out["prospective"] = {{"consensus", to_json(p.consensus)},
                              {"pioneer", to_json(p.pioneer)},
                              {"weights", p.weights},
                              {"ns", p.ns},
                              {"sigma", p.sigma},
                              {"replicates", p.replicates}};
    }
    if (s.grid) out["grid"] = {{"lo", s.grid->lo}, {"hi", s.grid->hi}, {"nodes", s.grid->nodes}};
    return out;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

json to_json(const LearningReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"w2", r.w2},
            {"mean_shift_sq", r.mean_shift_sq},
            {"sd_shift_sq", r.sd_shift_sq},
            {"normalized_w2", r.normalized_w2},
            {"kl_forward", opt(r.kl_forward)},
            {"kl_reverse", opt(r.kl_reverse)},
            {"kl_sym", opt(r.kl_sym)},
            {"lindley", opt(r.lindley)},
            {"decomposition_exact", r.decomposition_exact}};
}

std::string report_csv_header() {
    return "w2,mean_shift_sq,sd_shift_sq,normalized_w2,kl_forward,kl_reverse,kl_sym,lindley,"
           "decomposition_exact";
}

std::string report_csv_row(const LearningReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    std::ostringstream out;
    out << format_number(r.w2) << ',' << format_number(r.mean_shift_sq) << ','
        << format_number(r.sd_shift_sq) << ',' << format_number(r.normalized_w2) << ','
        << opt(r.kl_forward) << ',' << opt(r.kl_reverse) << ',' << opt(r.kl_sym) << ','
        << opt(r.lindley) << ',' << (r.decomposition_exact ? "true" : "false");
    return out.str();
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream out;
    out << "w,n,expected_learning,mc_std_error\n";
    for (const auto& p : points) {
        out << format_number(p.w) << ',' << p.n << ',' << format_number(p.expected_learning) << ','
            << format_number(p.mc_std_error) << '\n';
    }
    return out.str();
}

}  // namespace wlearn
