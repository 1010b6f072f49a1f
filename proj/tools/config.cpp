#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace sfe::cli {

const char* to_string(Suite s) {
    switch (s) {
        case Suite::modified: return "modified";
        case Suite::bowen: return "bowen";
        case Suite::tau: return "tau";
        case Suite::quotient: return "quotient";
    }
    return "?";
}

bool ExperimentConfig::has(Suite s) const { return std::find(suites.begin(), suites.end(), s) != suites.end(); }

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Numbers may be written as multiples of pi: "pi", "2pi", "0.5*pi", "-pi".
double real_at(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw config_error(path, "expected a number");
    const std::string s = n.Scalar();
    static const std::regex with_pi(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*$)");
    std::smatch m;
    if (std::regex_match(s, m, with_pi)) {
        const std::string c = m[1].str();
        return (c.empty() ? 1.0 : std::stod(c)) * pi;
    }
    if (s == "-pi") return -pi;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error(path, "expected a number, got '" + s + "'");
    }
}

long long integer_at(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw config_error(path, "expected an integer");
    try {
        std::size_t used = 0;
        const long long v = std::stoll(n.Scalar(), &used);
        if (used != n.Scalar().size()) throw std::invalid_argument(n.Scalar());
        return v;
    } catch (const std::exception&) {
        throw config_error(path, "expected an integer, got '" + n.Scalar() + "'");
    }
}

std::size_t count_at(const YAML::Node& n, const std::string& path, long long min = 0) {
    const long long v = integer_at(n, path);
    if (v < min) throw config_error(path, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

bool bool_at(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw config_error(path, "expected true or false");
    const std::string s = n.Scalar();
    if (s == "true" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "no" || s == "off") return false;
    throw config_error(path, "expected true or false, got '" + s + "'");
}

std::string string_at(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw config_error(path, "expected a string");
    return n.Scalar();
}

std::vector<double> list_at(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) throw config_error(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(real_at(n[i], index(path, i)));
    return out;
}

void positive_decreasing(const std::vector<double>& v, const std::string& path) {
    if (v.empty()) throw config_error(path, "must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0)) throw config_error(index(path, i), "must be positive");
        if (i > 0 && !(v[i] < v[i - 1])) throw config_error(index(path, i), "must be strictly decreasing");
    }
}

void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) throw config_error(path.empty() ? "<root>" : path, "expected a mapping");
    for (const auto& kv : n) {
        const std::string k = kv.first.Scalar();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            throw config_error(join(path, k), "unknown key");
    }
}

std::vector<double> schedule_at(const YAML::Node& n, const std::string& path) {
    std::vector<double> out;
    if (n.IsMap()) {
        check_keys(n, path, {"start", "step", "count"});
        for (const char* k : {"start", "step", "count"})
            if (!n[k]) throw config_error(join(path, k), "missing");
        const double start = real_at(n["start"], join(path, "start"));
        const double step = real_at(n["step"], join(path, "step"));
        const std::size_t count = count_at(n["count"], join(path, "count"), 1);
        if (!(step > 0)) throw config_error(join(path, "step"), "must be positive");
        for (std::size_t k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
    } else {
        out = list_at(n, path);
    }
    if (out.empty()) throw config_error(path, "must not be empty");
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] > 0)) throw config_error(index(path, i), "must be positive");
        if (i > 0 && !(out[i] > out[i - 1])) throw config_error(index(path, i), "must be strictly increasing");
    }
    return out;
}

std::vector<Suite> suites_at(const YAML::Node& n, const std::string& path) {
    std::vector<std::string> names;
    if (n.IsScalar()) {
        names.push_back(n.Scalar());
    } else if (n.IsSequence()) {
        for (std::size_t i = 0; i < n.size(); ++i) names.push_back(string_at(n[i], index(path, i)));
    } else if (!n.IsNull()) {
        throw config_error(path, "expected a suite name or a list of suite names");
    }
    std::set<Suite> chosen;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& s = names[i];
        const std::string where = n.IsSequence() ? index(path, i) : path;
        if (s == "all") chosen.insert({Suite::modified, Suite::bowen, Suite::tau, Suite::quotient});
        else if (s == "modified") chosen.insert(Suite::modified);
        else if (s == "bowen") chosen.insert(Suite::bowen);
        else if (s == "tau") chosen.insert(Suite::tau);
        else if (s == "quotient") chosen.insert(Suite::quotient);
        else if (s == "none") {
        } else
            throw config_error(where, "unknown suite '" + s + "' (modified, bowen, tau, quotient, all, none)");
    }
    return {chosen.begin(), chosen.end()};
}

struct Defaults {
    std::vector<double> eps, delta, schedule;
    double rho;
    double resolution;
    std::optional<std::size_t> section_points;
    std::optional<std::pair<double, double>> window;
};

Defaults defaults_for(const std::string& model) {
    std::vector<double> revolutions;
    for (int k = 1; k <= 10; ++k) revolutions.push_back(k * two_pi);
    if (model == "doubling-suspension")
        return {{0.1}, {0.25}, {4, 5, 6, 7, 8, 9, 10, 11, 12}, 0.1, 0.0, 16384, std::pair{4.0, 12.0}};
    if (model == "rotation") return {{0.2, 0.1}, {0.5}, revolutions, 0.2, 0.02, std::nullopt, std::nullopt};
    return {{0.2, 0.1, 0.05}, {0.5, 0.25}, revolutions, 0.2, 0.02, std::nullopt, std::nullopt};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw config_error("<root>", std::string("malformed YAML: ") + e.what());
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    check_keys(root, "",
               {"model", "suite", "eps_path", "delta_path", "rho", "schedule", "sample_resolution",
                "sample_resolution_path", "section_points", "window", "seed", "jitter", "output_dir", "threads",
                "fault", "tolerances", "verify"});

    ExperimentConfig cfg;
    if (const YAML::Node m = root["model"]) {
        if (m.IsScalar()) {
            cfg.model = m.Scalar();
        } else {
            check_keys(m, "model", {"name", "params"});
            if (!m["name"]) throw config_error("model.name", "missing");
            cfg.model = string_at(m["name"], "model.name");
            if (const YAML::Node p = m["params"]) {
                if (!p.IsMap()) throw config_error("model.params", "expected a mapping");
                for (const auto& kv : p) {
                    const std::string k = kv.first.Scalar();
                    cfg.params[k] = real_at(kv.second, "model.params." + k);
                }
            }
        }
    }
    const auto names = model_names();
    if (std::find(names.begin(), names.end(), cfg.model) == names.end())
        throw config_error("model.name", "unknown model '" + cfg.model + "'");
    const Defaults d = defaults_for(cfg.model);

    cfg.suites = root["suite"] ? suites_at(root["suite"], "suite") : suites_at(YAML::Node("all"), "suite");
    cfg.eps_path = root["eps_path"] ? list_at(root["eps_path"], "eps_path") : d.eps;
    positive_decreasing(cfg.eps_path, "eps_path");
    cfg.delta_path = root["delta_path"] ? list_at(root["delta_path"], "delta_path") : d.delta;
    positive_decreasing(cfg.delta_path, "delta_path");
    cfg.rho = root["rho"] ? real_at(root["rho"], "rho") : d.rho;
    if (!(cfg.rho > 0)) throw config_error("rho", "must be positive");
    cfg.schedule = root["schedule"] ? schedule_at(root["schedule"], "schedule") : d.schedule;

    if (root["sample_resolution"] && root["sample_resolution_path"])
        throw config_error("sample_resolution_path", "give either sample_resolution or sample_resolution_path");
    if (root["sample_resolution"]) {
        cfg.resolution_path = {real_at(root["sample_resolution"], "sample_resolution")};
        if (!(cfg.resolution_path[0] > 0)) throw config_error("sample_resolution", "must be positive");
    } else if (root["sample_resolution_path"]) {
        cfg.resolution_path = list_at(root["sample_resolution_path"], "sample_resolution_path");
        positive_decreasing(cfg.resolution_path, "sample_resolution_path");
        if (cfg.resolution_path.size() != 1 && cfg.resolution_path.size() != cfg.eps_path.size())
            throw config_error("sample_resolution_path", "needs one entry or one per eps_path entry");
    } else {
        cfg.resolution_path = {d.resolution};
    }
    if (root["section_points"]) cfg.section_points = count_at(root["section_points"], "section_points", 1);
    else if (!root["sample_resolution"] && !root["sample_resolution_path"]) cfg.section_points = d.section_points;
    if (!cfg.section_points && !(cfg.resolution_path[0] > 0))
        throw config_error("sample_resolution", "required for this model");

    if (const YAML::Node w = root["window"]) {
        const auto v = list_at(w, "window");
        if (v.size() != 2 || !(v[0] < v[1])) throw config_error("window", "expected [T_min, T_max] with T_min < T_max");
        cfg.window = std::pair{v[0], v[1]};
    } else {
        cfg.window = d.window;
    }

    if (root["seed"]) {
        const long long s = integer_at(root["seed"], "seed");
        if (s < 0) throw config_error("seed", "must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (root["jitter"]) cfg.jitter = bool_at(root["jitter"], "jitter");
    if (root["output_dir"]) cfg.output_dir = string_at(root["output_dir"], "output_dir");
    if (root["threads"]) cfg.threads = static_cast<int>(count_at(root["threads"], "threads"));

    if (const YAML::Node f = root["fault"]) {
        check_keys(f, "fault", {"corrupt_jump"});
        if (f["corrupt_jump"]) {
            cfg.corrupt_jump = real_at(f["corrupt_jump"], "fault.corrupt_jump");
            if (cfg.corrupt_jump < 0) throw config_error("fault.corrupt_jump", "must be non-negative");
        }
    }
    if (const YAML::Node t = root["tolerances"]) {
        check_keys(t, "tolerances", {"rate_gap"});
        if (t["rate_gap"]) cfg.rate_gap_tol = real_at(t["rate_gap"], "tolerances.rate_gap");
    }
    if (const YAML::Node v = root["verify"]) {
        check_keys(v, "verify",
                   {"triples", "graph_nodes", "semiconjugation_points", "semiconjugation_horizon", "residual_tol",
                    "metric_tol"});
        VerifySettings& s = cfg.verify;
        if (v["triples"]) s.triples = count_at(v["triples"], "verify.triples");
        if (v["graph_nodes"]) s.graph_nodes = count_at(v["graph_nodes"], "verify.graph_nodes");
        if (v["semiconjugation_points"])
            s.semiconjugation_points = count_at(v["semiconjugation_points"], "verify.semiconjugation_points");
        if (v["semiconjugation_horizon"]) {
            s.semiconjugation_horizon = real_at(v["semiconjugation_horizon"], "verify.semiconjugation_horizon");
            if (!(s.semiconjugation_horizon > 0)) throw config_error("verify.semiconjugation_horizon", "must be positive");
        }
        if (v["residual_tol"]) s.residual_tol = real_at(v["residual_tol"], "verify.residual_tol");
        if (v["metric_tol"]) s.metric_tol = real_at(v["metric_tol"], "verify.metric_tol");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("<file>", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_against_model(const ExperimentConfig& cfg, const SemiflowSystem& sys) {
    if (cfg.has(Suite::tau)) {
        const double gamma = sys.min_impulse_gap();
        if (!(cfg.rho < gamma / 2))
            throw config_error("rho", "must be below half the impulse gap (" + std::to_string(gamma / 2) + ")");
    }
    if (cfg.section_points && sys.space().name() != "doubling-suspension")
        throw config_error("section_points", "only the doubling-suspension model has a section sampler");
    if (cfg.corrupt_jump > 0 && !sys.impulsive())
        throw config_error("fault.corrupt_jump", "the model has no jump map to corrupt");
}

}  // namespace sfe::cli
