#include "sfe/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace sfe {

bool lex_less(const Point& a, const Point& b) {
    const std::size_t n = std::max(a.dim, b.dim);
    return std::lexicographical_compare(a.c.begin(), a.c.begin() + n, b.c.begin(), b.c.begin() + n);
}

namespace {

struct Jumped {
    bool in_d;
    Point image;
};

Jumped jump_info(const SemiflowSystem& sys, const Point& x) {
    if (sys.impulsive() && sys.in_impulse_set(x)) return {true, sys.impulse()->jump(x)};
    return {false, x};
}

bool related_info(const MetricSpace& m, const Point& x, const Jumped& jx, const Point& y, const Jumped& jy,
                  double tol) {
    if (m.distance(x, y) <= tol) return true;
    if (jx.in_d && m.distance(jx.image, y) <= tol) return true;
    if (jy.in_d && m.distance(jy.image, x) <= tol) return true;
    return jx.in_d && jy.in_d && m.distance(jx.image, jy.image) <= tol;
}

bool contains_point(const MetricSpace& m, const PointSet& set, const Point& p) {
    for (const Point& q : set)
        if (m.same_point(q, p)) return true;
    return false;
}

}  // namespace

bool related(const SemiflowSystem& sys, const Point& x, const Point& y, double tol) {
    return related_info(sys.space(), x, jump_info(sys, x), y, jump_info(sys, y), tol);
}

QuotientPoint equivalence_class(const SemiflowSystem& sys, const Point& x, const PointSet& d_sample) {
    const MetricSpace& m = sys.space();
    m.check(x);
    // Everything that can be identified with anything: the D sample and its image.
    PointSet pool;
    for (const Point& d : d_sample) {
        pool.push_back(d);
        if (sys.impulsive()) pool.push_back(sys.impulse()->jump(d));
    }
    QuotientPoint out;
    out.representatives.push_back(x);
    for (std::size_t head = 0; head < out.representatives.size(); ++head) {
        const Point p = out.representatives[head];
        const Jumped jp = jump_info(sys, p);
        if (jp.in_d && !contains_point(m, out.representatives, jp.image)) out.representatives.push_back(jp.image);
        for (const Point& c : pool)
            if (!contains_point(m, out.representatives, c) &&
                related_info(m, p, jp, c, jump_info(sys, c), identification_tol))
                out.representatives.push_back(c);
    }
    std::sort(out.representatives.begin(), out.representatives.end(), lex_less);
    return out;
}

// --- graph -------------------------------------------------------------------

std::size_t IdentificationGraph::index_of(const Point& p) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Point& q = nodes[i];
        if (q.tag != p.tag || q.dim != p.dim) continue;
        bool same = true;
        for (std::size_t k = 0; k < q.dim && same; ++k) same = std::abs(q.c[k] - p.c[k]) <= coord_tol;
        if (same) return i;
    }
    throw domain_error("representative is not a graph node");
}

IdentificationGraph build_identification_graph(const SemiflowSystem& sys, const PointSet& nodes,
                                               const PointSet& d_sample) {
    const MetricSpace& m = sys.space();
    IdentificationGraph g;
    g.nodes = nodes;
    for (const Point& p : g.nodes) m.check(p);
    for (const Point& d : d_sample) {
        if (!contains_point(m, g.nodes, d)) g.nodes.push_back(d);
        if (sys.impulsive()) {
            Point img = sys.impulse()->jump(d);
            if (!contains_point(m, g.nodes, img)) g.nodes.push_back(img);
        }
    }
    const std::size_t n = g.nodes.size();
    std::vector<Jumped> info;
    for (const Point& p : g.nodes) info.push_back(jump_info(sys, p));
    g.weight.assign(n * n, 0.0);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = m.distance(g.nodes[i], g.nodes[j]);
            g.weight[i * n + j] = g.weight[j * n + i] = d;
            if (related_info(m, g.nodes[i], info[i], g.nodes[j], info[j], identification_tol)) {
                g.zero_edges.push_back({i, j});
                parent[find(i)] = find(j);
            }
        }
    std::vector<std::size_t> label(n, n);
    g.class_of.resize(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (label[r] == n) label[r] = next++;
        g.class_of[i] = label[r];
    }
    return g;
}

double quotient_pseudometric(const SemiflowSystem& sys, const QuotientPoint& x, const QuotientPoint& y,
                             const IdentificationGraph& graph) {
    (void)sys;
    // Fixed argument order makes the result symmetric to the last bit.
    const bool swap = lex_less(y.canonical(), x.canonical());
    const QuotientPoint& a = swap ? y : x;
    const QuotientPoint& b = swap ? x : y;
    const std::size_t n = graph.size();
    std::vector<double> dist(n, never);
    std::vector<char> done(n, 0), target(n, 0);
    for (const Point& p : a.representatives) dist[graph.index_of(p)] = 0.0;
    for (const Point& p : b.representatives) target[graph.index_of(p)] = 1;
    std::vector<std::vector<std::size_t>> mates(n);
    for (auto [i, j] : graph.zero_edges) {
        mates[i].push_back(j);
        mates[j].push_back(i);
    }
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t u = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!done[i] && (u == n || dist[i] < dist[u])) u = i;
        if (u == n || dist[u] == never) break;
        if (target[u]) return dist[u];
        done[u] = 1;
        for (std::size_t v = 0; v < n; ++v)
            if (!done[v]) dist[v] = std::min(dist[v], dist[u] + graph.w(u, v));
        for (std::size_t v : mates[u])
            if (!done[v]) dist[v] = std::min(dist[v], dist[u]);
    }
    return never;
}

std::vector<double> quotient_distance_matrix(const IdentificationGraph& graph) {
    const std::size_t n = graph.size();
    std::vector<double> d = graph.weight;
    for (auto [i, j] : graph.zero_edges) d[i * n + j] = d[j * n + i] = 0.0;
    // A symmetric start stays exactly symmetric: both triangles add the same two terms.
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            const double dik = d[i * n + k];
            double* row = &d[i * n];
            const double* krow = &d[k * n];
            for (std::size_t j = 0; j < n; ++j) row[j] = std::min(row[j], dik + krow[j]);
        }
    return d;
}

// --- direct metric -----------------------------------------------------------

QuotientMetric::QuotientMetric(const SemiflowSystem& sys, const PointSet& d_sample) : space_(sys.space()) {
    if (sys.impulsive()) {
        for (const Point& d : d_sample) {
            if (!contains_point(space_, k_, d)) k_.push_back(d);
            Point img = sys.impulse()->jump(d);
            if (!contains_point(space_, k_, img)) k_.push_back(img);
        }
    }
    const std::size_t n = k_.size();
    kk_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            kk_[i * n + j] = related(sys, k_[i], k_[j]) ? 0.0 : space_.distance(k_[i], k_[j]);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) kk_[i * n + j] = std::min(kk_[i * n + j], kk_[i * n + k] + kk_[k * n + j]);
}

QuotientMetric::QuotientMetric(const SemiflowSystem& sys) : QuotientMetric(sys, sys.impulse_sample()) {}

double QuotientMetric::distance(const Point& x0, const Point& y0) const {
    const bool swap = lex_less(y0, x0);
    const Point& x = swap ? y0 : x0;
    const Point& y = swap ? x0 : y0;
    double best = space_.distance(x, y);
    const std::size_t n = k_.size();
    if (n == 0) return best;
    double dx[16], dy[16];
    std::vector<double> hx, hy;
    double* px = dx;
    double* py = dy;
    if (n > 16) {
        hx.resize(n);
        hy.resize(n);
        px = hx.data();
        py = hy.data();
    }
    for (std::size_t a = 0; a < n; ++a) {
        px[a] = space_.distance(x, k_[a]);
        py[a] = space_.distance(k_[a], y);
    }
    for (std::size_t a = 0; a < n; ++a) {
        if (px[a] >= best) continue;
        for (std::size_t b = 0; b < n; ++b) best = std::min(best, px[a] + kk_[a * n + b] + py[b]);
    }
    return best;
}

// --- metricity ---------------------------------------------------------------

MetricityReport metricity_check(const SemiflowSystem& sys, const IdentificationGraph& graph, double tol,
                                std::size_t symmetry_probes) {
    MetricityReport rep;
    const std::size_t n = graph.size();
    rep.nodes = n;
    if (sys.impulsive()) {
        const RegularityReport reg = check_regularity(sys);
        rep.hypothesis_ok = reg.disjoint.pass && reg.lipschitz.pass;
        if (!reg.disjoint.pass) rep.hypothesis_detail = reg.disjoint.witness <= sys.options().fuzz
                                                            ? "I(D) meets D"
                                                            : "I(D) too close to D";
        else if (!reg.lipschitz.pass)
            rep.hypothesis_detail = "jump map not Lipschitz";
    }
    if (n == 0) return rep;
    auto note = [&](const std::string& s) {
        if (rep.violations.size() < 20) rep.violations.push_back(s);
    };
    const std::vector<double> d = quotient_distance_matrix(graph);

    std::vector<std::size_t> rep_of;  // one node per class
    for (std::size_t i = 0; i < n; ++i)
        if (graph.class_of[i] == rep_of.size()) rep_of.push_back(i);
    rep.classes = rep_of.size();

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            ++rep.pairs_checked;
            const double v = d[i * n + j];
            if (v != d[j * n + i]) {
                ++rep.symmetry_violations;
                note("asymmetric distance between nodes " + std::to_string(i) + " and " + std::to_string(j));
            }
            if (v > graph.w(i, j)) {
                ++rep.domination_violations;
                note("quotient distance above space distance at nodes " + std::to_string(i) + ", " +
                     std::to_string(j));
            }
            if (graph.class_of[i] != graph.class_of[j] && v < tol) {
                ++rep.zero_distance_violations;
                note("distinct classes at distance " + format_real(v) + ": nodes " + std::to_string(i) + ", " +
                     std::to_string(j));
            }
        }
    const std::size_t c = rep_of.size();
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b) {
            const double dab = d[rep_of[a] * n + rep_of[b]];
            for (std::size_t e = 0; e < c; ++e) {
                ++rep.triples_checked;
                const double excess = d[rep_of[a] * n + rep_of[e]] - dab - d[rep_of[b] * n + rep_of[e]];
                if (excess > rep.max_triangle_excess) rep.max_triangle_excess = excess;
                if (excess > 1e-12) {
                    ++rep.triangle_violations;
                    note("triangle inequality off by " + format_real(excess));
                }
            }
        }
    // The single-query path must be symmetric too.
    const PointSet ds = sys.impulse_sample();
    const std::size_t stride = std::max<std::size_t>(1, n / std::max<std::size_t>(1, symmetry_probes));
    for (std::size_t i = 0; i < n; i += stride) {
        const std::size_t j = (i * 7919 + 13) % n;
        const QuotientPoint x = equivalence_class(sys, graph.nodes[i], ds);
        const QuotientPoint y = equivalence_class(sys, graph.nodes[j], ds);
        if (quotient_pseudometric(sys, x, y, graph) != quotient_pseudometric(sys, y, x, graph)) {
            ++rep.symmetry_violations;
            note("asymmetric single query at nodes " + std::to_string(i) + ", " + std::to_string(j));
        }
    }
    return rep;
}

// --- induced semiflow --------------------------------------------------------

QuotientPoint induced_evolve(const SemiflowSystem& sys, double t, const QuotientPoint& x) {
    if (t < 0) throw domain_error("induced_evolve: negative time");
    if (region_membership(sys, x.canonical()) != Region::in_x_xi)
        throw domain_error("induced_evolve: canonical representative outside X_xi");
    if (t == 0) return x;
    return equivalence_class(sys, impulsive_evolve(sys, x.canonical(), t), sys.impulse_sample());
}

bool induced_well_defined(const SemiflowSystem& sys, double t, const QuotientPoint& x) {
    PointSet images;
    for (const Point& p : x.representatives)
        if (region_membership(sys, p) == Region::in_x_xi) images.push_back(impulsive_evolve(sys, p, t));
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j)
            if (!related(sys, images[i], images[j])) return false;
    return true;
}

double semiconjugation_residual(const SemiflowSystem& sys, const std::vector<double>& t_grid, const PointSet& sample,
                                const SemiflowSystem* induced_side) {
    const SemiflowSystem& lhs = induced_side ? *induced_side : sys;
    if (t_grid.empty() || sample.empty()) return 0.0;
    std::vector<double> ts = t_grid;
    std::sort(ts.begin(), ts.end());
    if (ts.front() < 0) throw domain_error("semiconjugation: negative time");
    const QuotientMetric metric(sys);
    const PointSet ds = sys.impulse_sample();
    double worst = 0.0;
    for (const Point& x : sample) {
        if (region_membership(sys, x) != Region::in_x_xi)
            throw domain_error("semiconjugation sample point outside X_xi");
        Trajectory direct(sys, x, ts.back());
        QuotientPoint induced = equivalence_class(lhs, x, ds);
        double t_prev = 0.0;
        for (double t : ts) {
            induced = induced_evolve(lhs, t - t_prev, induced);
            t_prev = t;
            const QuotientPoint h = equivalence_class(sys, direct.at(t), ds);
            worst = std::max(worst, metric.distance(induced.canonical(), h.canonical()));
        }
    }
    return worst;
}

PointSet restrict_to_x_xi(const SemiflowSystem& sys, const PointSet& sample) {
    PointSet out;
    for (const Point& p : sample)
        if (region_membership(sys, p) == Region::in_x_xi) out.push_back(p);
    return out;
}

// --- entropy comparison ------------------------------------------------------

std::vector<double> QuotientCompareReport::rates() const {
    return {modified_x.headline.reported_rate(), modified_xi.headline.reported_rate(),
            bowen_quotient.headline.reported_rate()};
}

double QuotientCompareReport::max_gap() const {
    const auto r = rates();
    return *std::max_element(r.begin(), r.end()) - *std::min_element(r.begin(), r.end());
}

QuotientCompareReport quotient_entropy_compare(const SemiflowSystem& sys, const QuotientCompareConfig& cfg) {
    const RegularityReport reg = check_regularity(sys);
    if (!reg.regular()) throw domain_error("system is not regular: " + reg.first_failure());
    Sampler base = cfg.sampler;
    if (!base) base = [&sys](double r) { return sys.space().sample_grid(r); };
    Sampler xi = [&sys, base](double r) { return restrict_to_x_xi(sys, base(r)); };
    auto metric = std::make_shared<QuotientMetric>(sys);

    QuotientCompareReport rep;
    EstimateOptions o;
    o.window = cfg.window;
    o.sampler = base;
    rep.modified_x = estimate_entropy(sys, cfg.resolution_path, cfg.eps_path, cfg.delta_path, cfg.schedule,
                                      CountKind::separated, o);
    o.sampler = xi;
    rep.modified_xi = estimate_entropy(sys, cfg.resolution_path, cfg.eps_path, cfg.delta_path, cfg.schedule,
                                       CountKind::separated, o);
    o.metric = metric;
    rep.bowen_quotient = estimate_entropy(sys, cfg.resolution_path, cfg.eps_path, cfg.delta_path, cfg.schedule,
                                          CountKind::bowen_separated, o);
    rep.modified_quotient = estimate_entropy(sys, cfg.resolution_path, cfg.eps_path, cfg.delta_path, cfg.schedule,
                                             CountKind::separated, o);
    return rep;
}

// --- output ------------------------------------------------------------------

void write_graph_nodes_csv(std::ostream& os, const IdentificationGraph& graph) {
    os << "node,c0,c1,c2,class\n";
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const Point& p = graph.nodes[i];
        os << i;
        for (std::size_t k = 0; k < max_coords; ++k) os << ',' << (k < p.dim ? format_real(p.c[k]) : std::string());
        os << ',' << graph.class_of[i] << '\n';
    }
}

void write_graph_edges_csv(std::ostream& os, const IdentificationGraph& graph) {
    os << "source,target,weight,zero\n";
    const std::size_t n = graph.size();
    std::vector<char> zero(n * n, 0);
    for (auto [i, j] : graph.zero_edges) zero[i * n + j] = 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            os << i << ',' << j << ',' << format_real(graph.w(i, j)) << ',' << int(zero[i * n + j]) << '\n';
}

}  // namespace sfe
