#include <doctest.h>

#include <cmath>
#include <random>

#include "sfe/metric_space.hpp"

using namespace sfe;

namespace {

double polar_chord(double r1, double t1, double r2, double t2) {
    return std::sqrt(r1 * r1 + r2 * r2 - 2 * r1 * r2 * std::cos(t1 - t2));
}

Point random_point(const MetricSpace& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (s.name() == "annulus") return s.make({1.0 + u(rng), two_pi * u(rng)});
    if (s.name() == "circle") return s.make({two_pi * u(rng)});
    return s.make({u(rng), u(rng)});
}

}  // namespace

TEST_CASE("wrap_angle lands in [0, 2pi)") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(two_pi) == doctest::Approx(0.0));
    CHECK(wrap_angle(-0.5) == doctest::Approx(two_pi - 0.5));
    CHECK(wrap_angle(7 * pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-1e-18) < two_pi);
}

TEST_CASE("annulus distance is the planar chord") {
    AnnulusSpace a;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> r(1.0, 2.0), t(0.0, two_pi);
    for (int i = 0; i < 500; ++i) {
        const double r1 = r(rng), t1 = t(rng), r2 = r(rng), t2 = t(rng);
        CHECK(a.distance(a.make({r1, t1}), a.make({r2, t2})) == doctest::Approx(polar_chord(r1, t1, r2, t2)).epsilon(1e-12));
    }
    CHECK(a.distance(a.make({1.5, 0.0}), a.make({1.0, pi})) == doctest::Approx(2.5));
    CHECK(a.diameter() == 4.0);
}

TEST_CASE("metric axioms on random triples") {
    AnnulusSpace a;
    CircleSpace c(1.5);
    SuspensionSpace s(0.06, 1.0 / two_pi);
    std::mt19937_64 rng(7);
    for (const MetricSpace* sp : {static_cast<const MetricSpace*>(&a), static_cast<const MetricSpace*>(&c),
                                  static_cast<const MetricSpace*>(&s)}) {
        CAPTURE(sp->name());
        for (int i = 0; i < 2000; ++i) {
            const Point x = random_point(*sp, rng), y = random_point(*sp, rng), z = random_point(*sp, rng);
            CHECK(sp->distance(x, x) == 0.0);
            CHECK(sp->distance(x, y) == sp->distance(y, x));
            CHECK(sp->distance(x, z) <= sp->distance(x, y) + sp->distance(y, z) + 1e-15);
            CHECK(sp->distance(x, y) <= sp->diameter() + 1e-12);
        }
    }
}

TEST_CASE("suspension roof gluing") {
    SuspensionSpace s(0.06, 1.0 / two_pi);
    const Point p = s.make({0.3, 1.0});
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[1] == 0.0);
    const Point q = s.make({0.7, 2.25});
    CHECK(q[0] == doctest::Approx(0.8));
    CHECK(q[1] == doctest::Approx(0.25));
    // continuity across the roof
    CHECK(s.distance(s.make({0.3, 1.0 - 1e-9}), s.make({0.6, 0.0})) < 1e-7);
    // points on the same fibre over different bases are apart
    CHECK(s.distance(s.make({0.1, 0.5}), s.make({0.6, 0.5})) > 0.05);
}

TEST_CASE("sample grids cover at their resolution") {
    AnnulusSpace a;
    CircleSpace c;
    SuspensionSpace s(0.06, 1.0 / two_pi);
    std::mt19937_64 rng(3);
    for (const MetricSpace* sp : {static_cast<const MetricSpace*>(&a), static_cast<const MetricSpace*>(&c),
                                  static_cast<const MetricSpace*>(&s)}) {
        CAPTURE(sp->name());
        for (double res : {0.2, 0.1}) {
            const PointSet grid = sp->sample_grid(res);
            CHECK(static_cast<double>(grid.size()) <= sp->grid_constant() / std::pow(res, sp->dim()));
            for (int i = 0; i < 200; ++i) {
                const Point x = random_point(*sp, rng);
                double best = 1e9;
                for (const Point& g : grid) best = std::min(best, sp->distance(x, g));
                CHECK(best <= res);
            }
        }
    }
}

TEST_CASE("ring sample spacing") {
    AnnulusSpace a;
    const PointSet ring = a.ring_sample(1.5, 0.02);
    CHECK(ring.size() == static_cast<std::size_t>(std::ceil(two_pi * 1.5 / 0.02)));
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) CHECK(a.distance(ring[i], ring[i + 1]) <= 0.02);
}

TEST_CASE("chart errors") {
    AnnulusSpace a;
    CircleSpace c;
    CHECK_THROWS_AS(a.make({1.0}), domain_error);
    CHECK_THROWS_AS(a.distance(a.make({1.0, 0.0}), c.make({0.0})), domain_error);
    CHECK_THROWS_AS(AnnulusSpace(2.0, 1.0), domain_error);
    CHECK_THROWS_AS(a.sample_grid(0.0), domain_error);
    CHECK(a.contains(a.make({1.0, 7.0})));
    CHECK_FALSE(a.contains(a.make({2.5, 0.0})));
}
