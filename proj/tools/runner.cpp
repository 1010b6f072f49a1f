#include "runner.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <tuple>

#include "sfe/entropy.hpp"
#include "sfe/quotient.hpp"

namespace sfe::cli {

const char* to_string(Status s) {
    switch (s) {
        case Status::pass: return "PASS";
        case Status::fail: return "FAIL";
        case Status::not_applicable: return "NOT-APPLICABLE";
    }
    return "?";
}

bool RunSummary::any_fail() const {
    return std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == Status::fail; });
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (std::uint64_t{words[0]} << 32) | words[1];
}

std::uint64_t bits_of(double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, sizeof b);
    return b;
}

// Moves each point by at most `amp`; a point whose perturbations keep
// leaving the space stays put.
PointSet jittered(const MetricSpace& s, PointSet pts, double amp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Point& p : pts) {
        double a = amp;
        for (int attempt = 0; attempt < 8; ++attempt, a *= 0.5) {
            Point q = p;
            for (std::size_t k = 0; k < q.dim; ++k) q.c[k] += a * u(rng);
            q = s.normalize(q);
            if (s.contains(q) && s.distance(p, q) <= amp) {
                p = q;
                break;
            }
        }
    }
    return pts;
}

Verdict verdict(const std::string& suite, const std::string& name, bool ok, double witness, double reference,
                std::string detail) {
    return {suite, name, ok ? Status::pass : Status::fail, witness, reference, std::move(detail)};
}

Verdict not_applicable(const std::string& suite, const std::string& name, std::string detail) {
    return {suite, name, Status::not_applicable, 0.0, 0.0, std::move(detail)};
}

class Session {
public:
    Session(const ExperimentConfig& cfg, Mode mode) : cfg_(cfg), mode_(mode) {
        try {
            sys_ = make_model(cfg.model, cfg.params);
        } catch (const std::invalid_argument& e) {
            throw config_error("model.params", e.what());
        }
        validate_against_model(cfg, *sys_);
        summary_.model = cfg.model;
        summary_.mode = mode;
        sampler_ = [this](double res) { return sample(res); };
    }

    RunSummary go() {
        const auto t0 = std::chrono::steady_clock::now();
        std::filesystem::create_directories(cfg_.output_dir);
        if (cfg_.suites.empty()) {
            summary_.verdicts.push_back(not_applicable("none", "suites", "no suite selected"));
        }
        for (Suite s : cfg_.suites) {
            spdlog::info("suite {} ({})", to_string(s), mode_ == Mode::run ? "run" : "verify");
            switch (s) {
                case Suite::modified: modified_suite(); break;
                case Suite::bowen: bowen_suite(); break;
                case Suite::tau: tau_suite(); break;
                case Suite::quotient: quotient_suite(); break;
            }
        }
        write_outputs();
        summary_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream txt(std::filesystem::path(cfg_.output_dir) / "summary.txt");
        txt << format_summary(summary_);
        return summary_;
    }

private:
    // --- sampling ------------------------------------------------------------

    PointSet sample(double res) const {
        PointSet pts;
        double amp = res / 4;
        if (cfg_.section_points) {
            const auto& space = dynamic_cast<const SuspensionSpace&>(sys_->space());
            pts = space.section_sample(*cfg_.section_points);
            amp = 0.25 / static_cast<double>(*cfg_.section_points) * space.base_radius() * two_pi;
        } else {
            pts = sys_->space().sample_grid(res);
        }
        if (cfg_.jitter) pts = jittered(sys_->space(), std::move(pts), amp, mix(cfg_.seed, bits_of(res)));
        return pts;
    }

    double resolution(std::size_t i) const {
        return cfg_.resolution_path.size() == 1 ? cfg_.resolution_path[0] : cfg_.resolution_path[i];
    }

    CountEngine& engine(std::size_t i) {
        const double res = cfg_.section_points ? 0.0 : resolution(i);
        auto& e = engines_[res];
        if (!e) {
            e = std::make_unique<CountEngine>(*sys_, sample(res), cfg_.schedule, res);
            spdlog::info("sample at resolution {}: {} points", res, e->sample().size());
        }
        return *e;
    }

    const CountTable& counts(CountKind kind, std::size_t i, double delta, double rho = 0.0, bool seeded = false) {
        const auto key = std::make_tuple(static_cast<int>(kind), cfg_.eps_path[i], delta, rho, seeded);
        auto it = tables_.find(key);
        if (it != tables_.end()) return it->second;
        spdlog::debug("counting {} at eps {} delta {}", to_string(kind), cfg_.eps_path[i], delta);
        CountTable t = engine(i).counts(kind, cfg_.eps_path[i], delta, rho, seeded);
        order_.push_back(key);
        return tables_.emplace(key, std::move(t)).first->second;
    }

    EntropyEstimate fit(const CountTable& t) const {
        return is_spanning(t.kind) ? fit_spanning_interval(t, cfg_.window) : fit_growth_rate(t, cfg_.window);
    }

    void headline(const std::string& suite, const std::string& name, const EntropyEstimate& e) {
        summary_.headlines.push_back({suite, name, e.reported_rate(), e.rate, e.residual, e.t_min, e.t_max});
        if (e.unreliable) summary_.diagnostics.push_back(suite + " " + name + ": large fit residual");
    }

    void record_estimates(CountKind kind, std::vector<EntropyEstimate> row) {
        auto& v = estimates_[to_string(kind)];
        v.insert(v.end(), row.begin(), row.end());
    }

    // Fits every cell of one kind; returns the last cell's estimate.
    EntropyEstimate fit_all(CountKind kind, double rho = 0.0, bool seeded = false) {
        std::vector<EntropyEstimate> row;
        for (std::size_t i = 0; i < cfg_.eps_path.size(); ++i)
            for (double delta : cfg_.delta_path) row.push_back(fit(counts(kind, i, delta, rho, seeded)));
        record_estimates(kind, row);
        return row.back();
    }

    // Members of greedy separated sets that leave sample points uncovered.
    Verdict spans_check(const std::string& suite, BallKind ball, const char* name) {
        std::size_t uncovered = 0, sets = 0;
        for (std::size_t i = 0; i < cfg_.eps_path.size(); ++i)
            for (double delta : cfg_.delta_path)
                for (std::size_t k = 0; k < cfg_.schedule.size(); ++k) {
                    CountEngine& e = engine(i);
                    const auto set = e.separated(ball, cfg_.eps_path[i], delta, 0.0, k);
                    uncovered += e.uncovered(ball, cfg_.eps_path[i], delta, 0.0, k, set);
                    ++sets;
                }
        return verdict(suite, name, uncovered == 0, static_cast<double>(uncovered), 0.0,
                       std::to_string(sets) + " greedy separated sets; witness = uncovered sample points");
    }

    // Cells where lower(kind a) > upper(kind b). With `lo_bound` the left side
    // is the certified lower bound of a spanning table instead of its greedy count.
    std::size_t chain_breaks(const CountTable& lo, const CountTable& hi, std::string& first, bool lo_bound) const {
        std::size_t bad = 0;
        for (std::size_t k = 0; k < lo.counts.size(); ++k) {
            const std::size_t left =
                lo_bound ? static_cast<std::size_t>(std::ceil(lo.lower_bounds.at(k) - 1e-9)) : lo.counts[k];
            if (left > hi.counts[k]) {
                if (bad++ == 0)
                    first = "first at eps " + format_real(lo.eps) + ", delta " + format_real(lo.delta) + ", T " +
                            format_real(lo.schedule[k]) + ": " + std::to_string(left) + " > " +
                            std::to_string(hi.counts[k]);
            }
        }
        return bad;
    }

    Verdict chain_verdict(const std::string& suite, const std::string& name, CountKind lo_kind, CountKind hi_kind,
                          double rho, bool hi_seeded, bool tau_gate = false, bool lo_bound = false) {
        std::size_t bad = 0, cells = 0;
        std::string first;
        for (std::size_t i = 0; i < cfg_.eps_path.size(); ++i)
            for (double delta : cfg_.delta_path) {
                if (tau_gate && !(delta > 2 * cfg_.rho)) continue;
                const CountTable& lo = counts(lo_kind, i, delta, lo_kind == CountKind::tau_separated ? rho : 0.0,
                                              lo_kind == CountKind::tau_separated);
                const CountTable& hi = counts(hi_kind, i, delta, hi_kind == CountKind::tau_separated ? rho : 0.0,
                                              hi_seeded);
                bad += chain_breaks(lo, hi, first, lo_bound);
                cells += lo.counts.size();
            }
        if (cells == 0) return not_applicable(suite, name, "no delta_path entry exceeds 2 rho");
        return verdict(suite, name, bad == 0, static_cast<double>(bad), 0.0,
                       std::to_string(cells) + " (T, eps, delta) cells; witness = violations" +
                           (first.empty() ? "" : "; " + first));
    }

    // --- property fuzz -------------------------------------------------------

    Verdict inclusion_fuzz(const std::string& suite, BallKind inner) {
        const std::string name = inner == BallKind::bowen ? "bowen-ball-in-modified" : "tau-ball-in-modified";
        if (cfg_.verify.triples == 0) return not_applicable(suite, name, "verify.triples is 0");
        const PointSet& centers = engine(0).sample();
        std::mt19937_64 rng(mix(cfg_.seed, inner == BallKind::bowen ? 1 : 2));
        std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1), eps_i(0, cfg_.eps_path.size() - 1),
            delta_i(0, cfg_.delta_path.size() - 1);
        std::uniform_real_distribution<double> T(0.0, cfg_.schedule.back());
        const double hint = sys_->base().time_step_hint();
        std::size_t members = 0, bad = 0, skipped = 0;
        for (std::size_t n = 0; n < cfg_.verify.triples; ++n) {
            const Point c = centers[pick(rng)];
            const Point y = jittered(sys_->space(), {c}, 0.25, rng())[0];
            const BallParams p{std::max(T(rng), 1e-3), cfg_.eps_path[eps_i(rng)], cfg_.delta_path[delta_i(rng)],
                               inner == BallKind::tau ? cfg_.rho : 0.0};
            bool in = false;
            if (inner == BallKind::bowen) {
                in = in_bowen_ball(*sys_, c, y, p.T, p.eps, make_grid(p.delta, hint));
            } else if (!tau_inclusion_applies(*sys_, c, p)) {
                ++skipped;
                continue;
            } else {
                in = in_tau_ball(*sys_, c, y, p);
            }
            if (!in) continue;
            ++members;
            bad += !in_modified_ball(*sys_, c, y, p);
        }
        std::string detail = std::to_string(cfg_.verify.triples) + " random triples, " + std::to_string(members) +
                             " inside the inner ball";
        if (skipped) detail += ", " + std::to_string(skipped) + " outside the inclusion domain";
        return verdict(suite, name, bad == 0, static_cast<double>(bad), 0.0, detail + "; witness = violations");
    }

    // --- suites --------------------------------------------------------------

    void modified_suite() {
        const std::string s = "modified";
        if (mode_ == Mode::run) {
            headline(s, "separated", fit_all(CountKind::separated));
            headline(s, "spanning", fit_all(CountKind::spanning));
            monotonicity(CountKind::separated);
            if (sys_->space().name() == "annulus") {
                double worst = 0.0;
                for (std::size_t i = 0; i < cfg_.eps_path.size(); ++i)
                    for (double delta : cfg_.delta_path)
                        for (std::size_t c : counts(CountKind::separated, i, delta).counts)
                            worst = std::max(worst, c * cfg_.eps_path[i] * cfg_.eps_path[i] / (8 * pi));
                summary_.verdicts.push_back(verdict(s, "count-bound", worst <= 1.0, worst, 1.0,
                                                    "largest separated count / (8 pi / eps^2)"));
            } else {
                summary_.verdicts.push_back(not_applicable(s, "count-bound", "the 8 pi / eps^2 bound is an annulus fact"));
            }
        }
        summary_.verdicts.push_back(
            chain_verdict(s, "spanning<=separated", CountKind::spanning, CountKind::separated, 0.0, false));
        summary_.verdicts.push_back(spans_check(s, BallKind::modified, "separated-sets-span"));
    }

    void bowen_suite() {
        const std::string s = "bowen";
        if (mode_ == Mode::run) {
            headline(s, "bowen-separated", fit_all(CountKind::bowen_separated, 0.0, true));
            headline(s, "bowen-spanning", fit_all(CountKind::bowen_spanning));
        } else {
            summary_.verdicts.push_back(inclusion_fuzz(s, BallKind::bowen));
        }
        summary_.verdicts.push_back(
            chain_verdict(s, "separated<=bowen-separated", CountKind::separated, CountKind::bowen_separated, 0.0, true));
        // Greedy covers are not optimal, so a greedy modified cover may exceed a
        // greedy Bowen one. Only the certified lower bound must stay below.
        summary_.verdicts.push_back(chain_verdict(s, "spanning-bound<=bowen-spanning", CountKind::spanning,
                                                  CountKind::bowen_spanning, 0.0, false, false, true));
        summary_.verdicts.push_back(chain_verdict(s, "bowen-spanning<=bowen-separated", CountKind::bowen_spanning,
                                                  CountKind::bowen_separated, 0.0, true));
        summary_.verdicts.push_back(spans_check(s, BallKind::bowen, "bowen-separated-sets-span"));
    }

    void tau_suite() {
        const std::string s = "tau";
        if (mode_ == Mode::run) {
            std::vector<EntropyEstimate> row;
            for (std::size_t i = 0; i < cfg_.eps_path.size(); ++i)
                for (double delta : cfg_.delta_path)
                    if (delta > 2 * cfg_.rho) row.push_back(fit(counts(CountKind::tau_separated, i, delta, cfg_.rho, true)));
            if (row.empty()) {
                summary_.diagnostics.push_back("tau: no delta_path entry exceeds 2 rho, no tau rate");
            } else {
                record_estimates(CountKind::tau_separated, row);
                headline(s, "tau-separated", row.back());
            }
        } else {
            summary_.verdicts.push_back(inclusion_fuzz(s, BallKind::tau));
        }
        const Verdict lower = chain_verdict(s, "spanning<=separated", CountKind::spanning, CountKind::separated,
                                            cfg_.rho, false, true);
        const Verdict upper = chain_verdict(s, "separated<=tau-separated", CountKind::separated,
                                            CountKind::tau_separated, cfg_.rho, true, true);
        Verdict chain = upper;
        chain.name = "spanning<=separated<=tau-separated";
        if (upper.status != Status::not_applicable) {
            chain.status = lower.status == Status::fail || upper.status == Status::fail ? Status::fail : Status::pass;
            chain.witness = lower.witness + upper.witness;
        }
        summary_.verdicts.push_back(chain);
    }

    void quotient_suite() {
        const std::string s = "quotient";
        const RegularityReport reg = check_regularity(*sys_);
        if (!reg.regular()) {
            summary_.verdicts.push_back(verdict(s, "regularity", false, 1.0, 0.0, "failing clause " + reg.first_failure()));
            return;
        }
        summary_.verdicts.push_back(verdict(s, "regularity", true, 0.0, 0.0, "all clauses hold"));

        if (mode_ == Mode::run) {
            QuotientCompareConfig qc;
            qc.resolution_path = cfg_.section_points ? std::vector<double>{0.0} : cfg_.resolution_path;
            qc.eps_path = cfg_.eps_path;
            qc.delta_path = cfg_.delta_path;
            qc.schedule = cfg_.schedule;
            qc.window = cfg_.window;
            qc.sampler = sampler_;
            const QuotientCompareReport q = quotient_entropy_compare(*sys_, qc);
            headline(s, "modified-on-X", q.modified_x.headline);
            headline(s, "modified-on-X_xi", q.modified_xi.headline);
            headline(s, "bowen-on-quotient", q.bowen_quotient.headline);
            headline(s, "modified-on-quotient", q.modified_quotient.headline);
            for (const auto* m : {&q.modified_x, &q.modified_xi, &q.bowen_quotient, &q.modified_quotient})
                for (const CountTable& t : m->tables) quotient_tables_.push_back(t);
            summary_.verdicts.push_back(verdict(s, "rate-agreement", q.max_gap() <= cfg_.rate_gap_tol, q.max_gap(),
                                                cfg_.rate_gap_tol,
                                                "largest gap among modified on X, on X_xi and Bowen on the quotient"));
        }

        // Graph on a seeded subsample.
        PointSet nodes = engine(0).sample();
        std::mt19937_64 rng(mix(cfg_.seed, 3));
        std::shuffle(nodes.begin(), nodes.end(), rng);
        if (nodes.size() > cfg_.verify.graph_nodes) nodes.resize(cfg_.verify.graph_nodes);
        graph_ = build_identification_graph(*sys_, nodes, sys_->impulse_sample());
        const MetricityReport m = metricity_check(*sys_, *graph_, cfg_.verify.metric_tol);
        std::ostringstream md;
        md << m.nodes << " nodes, " << m.classes << " classes; symmetry " << m.symmetry_violations << ", triangle "
           << m.triangle_violations << " (max excess " << format_real(m.max_triangle_excess) << "), zero-distance "
           << m.zero_distance_violations << ", domination " << m.domination_violations;
        if (!m.hypothesis_ok) md << "; hypothesis fails: " << m.hypothesis_detail;
        for (const std::string& v : m.violations) summary_.diagnostics.push_back("metricity: " + v);
        const double mviol = static_cast<double>(m.symmetry_violations + m.triangle_violations +
                                                 m.zero_distance_violations + m.domination_violations);
        summary_.verdicts.push_back(verdict(s, "metricity", m.pass(), mviol, 0.0, md.str()));

        PointSet xi_pts = restrict_to_x_xi(*sys_, engine(0).sample());
        std::shuffle(xi_pts.begin(), xi_pts.end(), rng);
        if (xi_pts.size() > cfg_.verify.semiconjugation_points) xi_pts.resize(cfg_.verify.semiconjugation_points);
        std::vector<double> grid;
        const int steps = 200;
        for (int k = 0; k <= steps; ++k) grid.push_back(cfg_.verify.semiconjugation_horizon * k / steps);
        std::shared_ptr<const SemiflowSystem> faulty;
        if (cfg_.corrupt_jump > 0) faulty = with_shifted_jump(*sys_, cfg_.corrupt_jump);
        const double residual = semiconjugation_residual(*sys_, grid, xi_pts, faulty.get());
        std::string detail = std::to_string(xi_pts.size()) + " points of X_xi, t up to " +
                             format_real(cfg_.verify.semiconjugation_horizon);
        if (faulty) detail += "; jump corrupted by " + format_real(cfg_.corrupt_jump);
        summary_.verdicts.push_back(
            verdict(s, "semiconjugation", residual < cfg_.verify.residual_tol, residual, cfg_.verify.residual_tol, detail));
    }

    void monotonicity(CountKind kind) {
        for (std::size_t j = 0; j < cfg_.delta_path.size(); ++j)
            for (std::size_t i = 1; i < cfg_.eps_path.size(); ++i) {
                const double a = fit(counts(kind, i - 1, cfg_.delta_path[j])).reported_rate();
                const double b = fit(counts(kind, i, cfg_.delta_path[j])).reported_rate();
                if (b < a - 0.05)
                    summary_.diagnostics.push_back(std::string(to_string(kind)) + ": rate drops as eps decreases to " +
                                                   format_real(cfg_.eps_path[i]));
            }
    }

    // --- output --------------------------------------------------------------

    void write_outputs() {
        namespace fs = std::filesystem;
        const fs::path dir(cfg_.output_dir);
        std::vector<CountTable> all;
        for (const auto& key : order_) all.push_back(tables_.at(key));
        {
            std::ofstream os(dir / "counts.csv");
            write_count_tables_csv(os, all);
        }
        if (!quotient_tables_.empty()) {
            std::ofstream os(dir / "quotient_counts.csv");
            write_count_tables_csv(os, quotient_tables_);
        }
        for (const auto& [kind, rows] : estimates_) {
            std::ofstream os(dir / ("estimates_" + kind + ".csv"));
            write_estimates_csv(os, rows);
        }
        if (graph_) {
            std::ofstream nodes(dir / "quotient_nodes.csv");
            write_graph_nodes_csv(nodes, *graph_);
            std::ofstream edges(dir / "quotient_edges.csv");
            write_graph_edges_csv(edges, *graph_);
        }
        std::ofstream os(dir / "summary.csv");
        write_summary_csv(os, summary_);
    }

    const ExperimentConfig& cfg_;
    Mode mode_;
    std::shared_ptr<const SemiflowSystem> sys_;
    Sampler sampler_;
    RunSummary summary_;
    std::map<double, std::unique_ptr<CountEngine>> engines_;
    std::map<std::tuple<int, double, double, double, bool>, CountTable> tables_;
    std::vector<std::tuple<int, double, double, double, bool>> order_;
    std::map<std::string, std::vector<EntropyEstimate>> estimates_;
    std::vector<CountTable> quotient_tables_;
    std::optional<IdentificationGraph> graph_;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

RunSummary execute(const ExperimentConfig& cfg, Mode mode) { return Session(cfg, mode).go(); }

void write_summary_csv(std::ostream& os, const RunSummary& s) {
    os << "suite,name,status,value,reference,detail\n";
    for (const Headline& h : s.headlines)
        os << h.suite << ',' << h.name << ",ESTIMATE," << format_real(h.rate) << ',' << format_real(h.residual) << ','
           << csv_field("raw slope " + format_real(h.raw_rate) + ", T in [" + format_real(h.t_min) + ", " +
                        format_real(h.t_max) + "]; reference = fit residual")
           << '\n';
    for (const Verdict& v : s.verdicts)
        os << v.suite << ',' << v.name << ',' << to_string(v.status) << ',' << format_real(v.witness) << ','
           << format_real(v.reference) << ',' << csv_field(v.detail) << '\n';
}

std::string format_summary(const RunSummary& s) {
    std::ostringstream os;
    os << (s.mode == Mode::run ? "run" : "verify") << " of model " << s.model << '\n';
    for (const Headline& h : s.headlines) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  rate %-9s %-22s %.4f (residual %.4f, T in [%g, %g])\n", h.suite.c_str(),
                      h.name.c_str(), h.rate, h.residual, h.t_min, h.t_max);
        os << buf;
    }
    for (const Verdict& v : s.verdicts) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-14s %-9s %-36s witness %g (reference %g)\n", to_string(v.status),
                      v.suite.c_str(), v.name.c_str(), v.witness, v.reference);
        os << buf << "      " << v.detail << '\n';
    }
    for (const std::string& d : s.diagnostics) os << "  note: " << d << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "wall time %.2fs\n", s.wall_seconds);
    os << buf;
    return os.str();
}

}  // namespace sfe::cli
