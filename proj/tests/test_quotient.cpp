#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sfe/models.hpp"
#include "sfe/quotient.hpp"

using namespace sfe;

namespace {

// Annulus identification by hand: only (3/2, 0) and (1, pi) are glued.
bool glued(const Point& a, const Point& b) {
    auto is = [](const Point& p, double r, double th) {
        return std::abs(p[0] - r) < 1e-9 && std::abs(wrap_angle(p[1] - th + pi) - pi) < 1e-9;
    };
    return (is(a, 1.5, 0) && is(b, 1.0, pi)) || (is(a, 1.0, pi) && is(b, 1.5, 0));
}

double chord(const Point& a, const Point& b) {
    return std::sqrt(a[0] * a[0] + b[0] * b[0] - 2 * a[0] * b[0] * std::cos(a[1] - b[1]));
}

// Floyd-Warshall over the node list with its own gluing rule.
std::vector<double> oracle_apsp(const PointSet& nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = glued(nodes[i], nodes[j]) ? 0.0 : chord(nodes[i], nodes[j]);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
    return d;
}

PointSet random_annulus(std::size_t n, unsigned seed) {
    const AnnulusSpace s;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> r(1.0, 2.0), th(0.0, two_pi);
    PointSet out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(s.make({r(rng), th(rng)}));
    return out;
}

}  // namespace

TEST_CASE("equivalence classes on the annulus") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const PointSet ds = sys->impulse_sample();

    const QuotientPoint lone = equivalence_class(*sys, s.make({1.3, 0.7}), ds);
    CHECK(lone.representatives.size() == 1);

    const QuotientPoint img = equivalence_class(*sys, s.make({1.0, pi}), ds);
    REQUIRE(img.representatives.size() == 2);
    CHECK(s.same_point(img.canonical(), s.make({1.0, pi})));
    CHECK(s.same_point(img.representatives[1], s.make({1.5, 0.0})));

    const QuotientPoint pre = equivalence_class(*sys, s.make({1.5, 0.0}), ds);
    REQUIRE(pre.representatives.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(s.same_point(pre.representatives[i], img.representatives[i]));

    CHECK(related(*sys, s.make({1.5, 0.0}), s.make({1.0, pi})));
    CHECK(related(*sys, s.make({1.0, pi}), s.make({1.5, 0.0})));
    CHECK_FALSE(related(*sys, s.make({1.5, 0.01}), s.make({1.0, pi})));
}

TEST_CASE("quotient pseudometric against a shortest path oracle") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const PointSet ds = sys->impulse_sample();
    PointSet nodes = random_annulus(60, 21);
    nodes.push_back(s.make({1.3, 0.0}));
    nodes.push_back(s.make({1.3, 0.1}));
    nodes.push_back(s.make({1.45, 0.0}));
    nodes.push_back(s.make({1.05, pi}));
    const IdentificationGraph g = build_identification_graph(*sys, nodes, ds);
    REQUIRE(g.size() == nodes.size() + 2);
    REQUIRE(g.zero_edges.size() == 1);

    const std::vector<double> want = oracle_apsp(g.nodes);
    const std::vector<double> got = quotient_distance_matrix(g);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n * n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    auto cls = [&](const Point& p) { return equivalence_class(*sys, p, ds); };
    auto q = [&](const Point& a, const Point& b) { return quotient_pseudometric(*sys, cls(a), cls(b), g); };
    const Point a = s.make({1.3, 0.0}), b = s.make({1.3, 0.1});
    CHECK(q(a, a) == 0.0);
    CHECK(q(s.make({1.5, 0.0}), s.make({1.0, pi})) == 0.0);
    CHECK(q(a, b) == doctest::Approx(want[g.index_of(a) * n + g.index_of(b)]));
    CHECK(q(a, b) == doctest::Approx(chord(a, b)));
    // routing through the glued pair beats the straight chord
    const Point c = s.make({1.45, 0.0}), e = s.make({1.05, pi});
    CHECK(q(c, e) == doctest::Approx(0.1));
    CHECK(chord(c, e) > 2.0);

    CHECK_THROWS_AS(q(a, s.make({1.9, 1.9})), domain_error);
}

TEST_CASE("direct quotient metric matches the two-waypoint formula") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const QuotientMetric m(*sys);
    const Point d = s.make({1.5, 0.0}), id = s.make({1.0, pi});
    const PointSet pts = random_annulus(400, 5);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point& x = pts[i];
        const Point& y = pts[i + 1];
        const double want = std::min({chord(x, y), chord(x, d) + chord(id, y), chord(x, id) + chord(d, y)});
        CHECK(m.distance(x, y) == doctest::Approx(want).epsilon(1e-12));
        CHECK(m.distance(x, y) == m.distance(y, x));
    }
    // without impulses the metric is the space metric
    auto rot = make_rotation();
    const QuotientMetric plain(*rot);
    CHECK(plain.anchors().empty());
    const Point u = rot->space().make({0.3}), v = rot->space().make({2.0});
    CHECK(plain.distance(u, v) == rot->space().distance(u, v));
}

TEST_CASE("metricity on a 500 node annulus graph") {
    auto sys = make_annulus();
    const IdentificationGraph g = build_identification_graph(*sys, random_annulus(500, 8), sys->impulse_sample());
    const MetricityReport r = metricity_check(*sys, g, 1e-6);
    CHECK(r.nodes >= 500);
    CHECK(r.hypothesis_ok);
    CHECK(r.symmetry_violations == 0);
    CHECK(r.triangle_violations == 0);
    CHECK(r.max_triangle_excess <= 1e-12);
    CHECK(r.zero_distance_violations == 0);
    CHECK(r.domination_violations == 0);
    CHECK(r.classes == r.nodes - 1);
    CHECK(r.pass());

    CHECK(metricity_check(*sys, IdentificationGraph{}).pass());
}

TEST_CASE("identity jump control flags the hypothesis") {
    auto sys = make_annulus_identity_jump();
    const IdentificationGraph g = build_identification_graph(*sys, random_annulus(100, 9), sys->impulse_sample());
    const MetricityReport r = metricity_check(*sys, g);
    CHECK_FALSE(r.hypothesis_ok);
    CHECK_FALSE(r.pass());
    CHECK(r.hypothesis_detail == "I(D) meets D");
}

TEST_CASE("induced semiflow") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const PointSet ds = sys->impulse_sample();
    const QuotientPoint x = equivalence_class(*sys, s.make({1.3, 0.0}), ds);
    CHECK(s.same_point(induced_evolve(*sys, 0.0, x).canonical(), x.canonical()));
    CHECK(s.distance(induced_evolve(*sys, pi, x).canonical(), s.make({1.3, pi})) < 1e-12);

    // orbit through the glued point lands in its class
    const QuotientPoint r = equivalence_class(*sys, s.make({1.5, 1.0}), ds);
    const QuotientPoint hit = induced_evolve(*sys, two_pi - 1.0, r);
    CHECK(hit.representatives.size() == 2);
    CHECK(induced_well_defined(*sys, 3.0, r));

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> th(0.2, two_pi), t(0.0, 3 * pi);
    for (int i = 0; i < 100; ++i) {
        const QuotientPoint p = equivalence_class(*sys, s.make({1.5, th(rng)}), ds);
        const double a = t(rng), b = t(rng);
        const Point lhs = induced_evolve(*sys, a + b, p).canonical();
        const Point rhs = induced_evolve(*sys, a, induced_evolve(*sys, b, p)).canonical();
        CHECK(s.distance(lhs, rhs) < 1e-7);
    }
    CHECK_THROWS_AS(induced_evolve(*sys, 1.0, equivalence_class(*sys, s.make({1.5, 0.05}), ds)), domain_error);
    CHECK_THROWS_AS(induced_evolve(*sys, -1.0, x), domain_error);
}

TEST_CASE("semiconjugation residual and its fault injection") {
    auto sys = make_annulus();
    const PointSet sample = restrict_to_x_xi(*sys, sys->space().sample_grid(0.25));
    PointSet ring;
    for (int k = 1; k < 40; ++k) ring.push_back(sys->space().make({1.5, 0.2 + 0.15 * k}));
    PointSet pts = sample;
    pts.insert(pts.end(), ring.begin(), ring.end());
    for (const Point& p : pts) REQUIRE(region_membership(*sys, p) == Region::in_x_xi);

    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(20 * pi * k / 100.0);
    CHECK(semiconjugation_residual(*sys, {0.0}, pts) == 0.0);
    CHECK(semiconjugation_residual(*sys, grid, pts) < 1e-7);

    const double shift = 0.3;
    auto bad = with_shifted_jump(*sys, shift);
    CHECK(semiconjugation_residual(*sys, grid, ring, bad.get()) >= 2 * std::sin(shift / 2) - 1e-9);
    CHECK_THROWS_AS(semiconjugation_residual(*sys, grid, {sys->space().make({1.5, 0.05})}), domain_error);
}

TEST_CASE("restriction to X_xi drops the collar only") {
    auto sys = make_annulus();
    const PointSet grid = sys->space().sample_grid(0.05);
    const PointSet kept = restrict_to_x_xi(*sys, grid);
    std::size_t dropped = 0;
    for (const Point& p : grid) dropped += region_membership(*sys, p) != Region::in_x_xi;
    CHECK(kept.size() + dropped == grid.size());
    CHECK(dropped < grid.size() / 50);
}

TEST_CASE("quotient comparison refuses irregular systems") {
    QuotientCompareConfig cfg;
    cfg.schedule = {2, 4, 6};
    CHECK_THROWS_AS(quotient_entropy_compare(*make_annulus_identity_jump(), cfg), domain_error);
}

TEST_CASE("rotation quotient is the identity") {
    auto sys = make_rotation();
    QuotientCompareConfig cfg;
    cfg.resolution_path = {0.05};
    cfg.eps_path = {0.2};
    cfg.delta_path = {0.5};
    cfg.schedule = {2, 4, 6, 8, 10, 12};
    const QuotientCompareReport r = quotient_entropy_compare(*sys, cfg);
    for (double v : r.rates()) CHECK(v == r.rates()[0]);
    CHECK(r.max_gap() == 0.0);
    CHECK(r.bowen_quotient.tables[0].counts == r.modified_x.tables[0].counts);
}

TEST_CASE("graph csv") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const IdentificationGraph g =
        build_identification_graph(*sys, {s.make({1.2, 0.5})}, sys->impulse_sample());
    std::ostringstream nodes, edges;
    write_graph_nodes_csv(nodes, g);
    write_graph_edges_csv(edges, g);
    CHECK(nodes.str().rfind("node,c0,c1,c2,class\n", 0) == 0);
    CHECK(edges.str().rfind("source,target,weight,zero\n", 0) == 0);
    int zeros = 0, lines = 0;
    std::istringstream in(edges.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        ++lines;
        zeros += line.back() == '1';
    }
    CHECK(lines == 3);
    CHECK(zeros == 1);
}
