#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "sfe/models.hpp"

using namespace sfe;

TEST_CASE("annulus closed form") {
    const AnnulusSpace s;
    const Point off = s.make({1.2, 0.4});
    CHECK(s.distance(annulus_closed_form(off, 3.0), s.make({1.2, 3.4})) < 1e-12);
    const Point on = s.make({1.5, 1.0});
    CHECK(s.distance(annulus_closed_form(on, two_pi - 1.0 - 1e-3), s.make({1.5, two_pi - 1e-3})) < 1e-12);
    CHECK(s.distance(annulus_closed_form(on, two_pi - 1.0), s.make({1.0, pi})) < 1e-12);
    CHECK(s.distance(annulus_closed_form(on, two_pi), s.make({1.0, pi + 1.0})) < 1e-12);
}

TEST_CASE("rotation flow is an isometry with no entropy source") {
    auto sys = make_rotation({2.0, 0.5});
    const auto& s = sys->space();
    const auto& f = sys->base();
    CHECK(f.isometric());
    CHECK_FALSE(sys->impulsive());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> th(0.0, two_pi), t(0.0, 50.0);
    for (int i = 0; i < 200; ++i) {
        const Point x = s.make({th(rng)}), y = s.make({th(rng)});
        const double tt = t(rng);
        CHECK(f.evolve(tt, x)[0] == doctest::Approx(wrap_angle(x[0] + 0.5 * tt)));
        CHECK(s.distance(f.evolve(tt, x), f.evolve(tt, y)) == doctest::Approx(s.distance(x, y)).epsilon(1e-9));
        auto back = f.evolve_back(tt, f.evolve(tt, x));
        REQUIRE(back);
        CHECK(s.distance(*back, x) < 1e-9);
    }
}

TEST_CASE("doubling suspension: time-1 map on the section is doubling") {
    auto sys = make_doubling_suspension();
    const auto& s = sys->space();
    const auto& f = sys->base();
    for (double x : {0.1, 0.3, 0.7, 0.95}) {
        const Point p = f.evolve(1.0, s.make({x, 0.0}));
        const double want = std::fmod(2 * x, 1.0);
        CHECK(p[0] == doctest::Approx(want));
        CHECK(p[1] == doctest::Approx(0.0));
        const Point h = f.evolve(0.25, s.make({x, 0.0}));
        CHECK(h[0] == doctest::Approx(x));
        CHECK(h[1] == doctest::Approx(0.25));
    }
}

TEST_CASE("itinerary oracle") {
    auto sys = make_doubling_suspension();
    CHECK(doubling_epsilon0(*sys) == doctest::Approx(0.12));
    CHECK(itinerary_separated_count(*sys, 4.0, 0.1) == 16);
    CHECK(itinerary_separated_count(*sys, 10.5, 0.1) == 1024);
    CHECK_THROWS_AS(itinerary_separated_count(*sys, 4.0, 0.5), domain_error);
    CHECK_THROWS_AS(doubling_epsilon0(*make_annulus()), domain_error);

    // distinct binary itineraries of length T among dyadic cells
    const int T = 6;
    std::set<long> words;
    const auto& s = sys->space();
    for (int j = 0; j < 4096; ++j) {
        Point p = s.make({(j + 0.5) / 4096.0, 0.0});
        long w = 0;
        for (int k = 0; k < T; ++k) {
            w = 2 * w + (p[0] >= 0.5 ? 1 : 0);
            p = sys->base().evolve(1.0, p);
        }
        words.insert(w);
    }
    CHECK(static_cast<long long>(words.size()) == itinerary_separated_count(*sys, T, 0.1));
}

TEST_CASE("model registry") {
    CHECK(model_names() == std::vector<std::string>{"annulus", "rotation", "doubling-suspension"});
    CHECK(make_model("annulus", {{"xi", 0.05}})->xi() == 0.05);
    CHECK(make_model("rotation", {})->space().name() == "circle");
    CHECK(make_model("doubling-suspension", {{"base_radius", 0.07}})->space().name() == "doubling-suspension");
    CHECK_THROWS_AS(make_model("lorenz", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_model("annulus", {{"omega", 1.0}}), std::invalid_argument);
}

TEST_CASE("shifted jump fault injection") {
    auto sys = make_annulus();
    auto bad = with_shifted_jump(*sys, 0.3);
    const auto& s = sys->space();
    const Point x = s.make({1.5, 0.0});
    CHECK(s.distance(impulsive_evolve(*bad, x, two_pi), s.make({1.0, pi + 0.3})) < 1e-8);
    CHECK_THROWS_AS(with_shifted_jump(*make_rotation(), 0.1), domain_error);
}
