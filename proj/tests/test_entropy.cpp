#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "sfe/entropy.hpp"
#include "sfe/models.hpp"

using namespace sfe;

namespace {

// Closed-form brute force: minimum of the annulus orbit distance over a dense grid of [0, delta).
double annulus_window_min(const Point& x, const Point& y, double delta, int n) {
    static const AnnulusSpace s;
    double best = 1e9;
    for (int j = 0; j < n; ++j) {
        const double t = delta * j / n;
        best = std::min(best, s.distance(annulus_closed_form(x, t), annulus_closed_form(y, t)));
    }
    return best;
}

double chord(double angle) { return 2.0 * std::sin(std::min(angle, two_pi - angle) / 2.0); }

// Exact maximum independent set of the cyclic graph "angular gap < w" on n
// equally spaced points: a greedy sweep from every start is optimal for arcs.
std::size_t cyclic_mis(std::size_t n, double eps) {
    auto close = [&](std::size_t a, std::size_t b) {
        const std::size_t d = a > b ? a - b : b - a;
        return chord(two_pi * static_cast<double>(std::min(d, n - d)) / static_cast<double>(n)) < eps;
    };
    std::size_t best = 0;
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::size_t> pick{s};
        for (std::size_t k = 1; k < n; ++k) {
            const std::size_t c = (s + k) % n;
            if (!close(c, pick.back()) && !close(c, s)) pick.push_back(c);
        }
        best = std::max(best, pick.size());
    }
    return best;
}

// Ball-membership bits of (i, j) from a pair table: bit k set when j is in the ball of i at T_k.
std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> table_bits(const PairTable& t) {
    std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> out;
    for (std::size_t i = 0; i + 1 < t.offsets.size(); ++i)
        for (std::uint32_t p = t.offsets[i]; p < t.offsets[i + 1]; ++p) out[{i, t.nbr[p]}] = t.j_in_i[p];
    return out;
}

std::vector<std::size_t> naive_greedy(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& in_ball) {
    std::vector<std::size_t> e;
    for (std::size_t y = 0; y < n; ++y) {
        bool ok = true;
        for (std::size_t x : e) ok = ok && !in_ball(x, y) && !in_ball(y, x);
        if (ok) e.push_back(y);
    }
    return e;
}

}  // namespace

TEST_CASE("time grid") {
    const TimeGrid g = make_grid(0.5, 0.1);
    CHECK(g.n_in == 32);
    CHECK(g.h_in * g.n_in == 0.5);
    CHECK(g.q >= 1);
    CHECK(g.h_out() <= 0.1 + 1e-15);
    CHECK(g.h_out() <= 0.25 + 1e-15);
    const TimeGrid fine = make_grid(0.5, 0.001);
    CHECK(fine.h_in <= 0.001);
    CHECK(fine.q == 1);
}

TEST_CASE("ddelta axioms and isometric value") {
    auto rot = make_rotation();
    const auto& s = rot->space();
    const Point x = s.make({0.3}), y = s.make({1.1});
    CHECK(ddelta(*rot, x, y, 0.5) == doctest::Approx(s.distance(x, y)).epsilon(1e-12));
    CHECK(ddelta(*rot, x, x, 0.5) == 0.0);

    auto ann = make_annulus();
    const auto& a = ann->space();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> r(1.0, 2.0), th(0.0, two_pi), d(0.05, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Point p = a.make({i % 2 ? 1.5 : r(rng), th(rng)}), q = a.make({i % 3 ? 1.5 : r(rng), th(rng)});
        const double dl = d(rng);
        CHECK(ddelta(*ann, p, q, dl) == ddelta(*ann, q, p, dl));
        CHECK(ddelta(*ann, p, p, dl) == 0.0);
        // a window of twice the length shares every sample
        CHECK(ddelta(*ann, p, q, 2 * dl) <= ddelta(*ann, p, q, dl));
    }
}

TEST_CASE("ddelta across a jump") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    // x jumps to r = 1 inside the window, moving away from y
    const Point x = s.make({1.5, two_pi - 0.01});
    const Point y = s.make({1.8, two_pi - 0.01});
    const double oracle = annulus_window_min(x, y, 0.1, 100000);
    CHECK(ddelta(*sys, x, y, 0.1) == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(ddelta(*sys, x, y, 0.1) == doctest::Approx(s.distance(x, y)).epsilon(1e-9));

    // x jumps onto the orbit of z: the window infimum collapses
    const Point z = s.make({1.0, pi - 0.01});
    CHECK(s.distance(x, z) > 2.0);
    CHECK(ddelta(*sys, x, z, 0.1) < 1e-8);
    CHECK(annulus_window_min(x, z, 0.1, 100000) < 1e-4);
}

TEST_CASE("modified and Bowen ball examples") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const Point c = s.make({1.5, 0.0});
    CHECK_FALSE(in_modified_ball(*sys, c, s.make({1.9, 0.0}), {two_pi, 0.1, 0.1, 0.0}));
    CHECK(in_modified_ball(*sys, c, c, {two_pi, 0.1, 0.1, 0.0}));
    CHECK(in_bowen_ball(*sys, c, c, two_pi, 0.1));

    // two points of one r = 3/2 orbit split at the first jump
    const Point a = s.make({1.5, 1.0}), b = s.make({1.5, 1.02});
    CHECK(in_bowen_ball(*sys, a, b, 1.0, 0.4));
    CHECK_FALSE(in_bowen_ball(*sys, a, b, two_pi, 0.4));

    auto rot = make_rotation();
    const auto& r = rot->space();
    CHECK_FALSE(in_bowen_ball(*rot, r.make({0.0}), r.make({0.2}), 50.0, 0.1));
    CHECK(in_bowen_ball(*rot, r.make({0.0}), r.make({0.05}), 50.0, 0.1));
    CHECK_THROWS_AS(in_modified_ball(*sys, c, c, {1.0, 0.0, 0.1, 0.0}), domain_error);
}

TEST_CASE("tau times and exclusion sets") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const auto t1 = tau_times(*sys, s.make({1.5, 0.0}), 10 * pi);
    REQUIRE(t1.size() == 2);
    CHECK(t1[0] == 0.0);
    CHECK(t1[1] == doctest::Approx(two_pi));
    CHECK(tau_times(*sys, s.make({1.0, 0.0}), 10 * pi) == std::vector<double>{0.0});
    CHECK_THROWS_AS(tau_times(*make_rotation(), make_rotation()->space().make({0.0}), 1.0), domain_error);

    // admissibility: the first impulse time decreases along the orbit
    const Point x = s.make({1.5, 2.0});
    const double tau = first_impulse_time(*sys, x, 10.0);
    for (double sft : {0.5, 1.7, 3.9})
        CHECK(std::abs(first_impulse_time(*sys, sys->base().evolve(sft, x), 10.0) - (tau - sft)) < 1e-8);

    const auto j = tau_exclusion_set({0.0, two_pi}, 10.0, 0.1);
    REQUIRE(j.size() == 2);
    CHECK(j[0].lo == doctest::Approx(0.1));
    CHECK(j[0].hi == doctest::Approx(two_pi - 0.1));
    CHECK(j[1].lo == doctest::Approx(two_pi + 0.1));
    CHECK(j[1].hi == 10.0);

    const auto k = tau_exclusion_set({0.0}, 5.0, 0.1);
    REQUIRE(k.size() == 1);
    CHECK(k[0].lo == doctest::Approx(0.1));
    CHECK(k[0].hi == 5.0);

    CHECK(tau_exclusion_set({0.0}, 0.05, 0.1).empty());
    CHECK_THROWS_AS(tau_exclusion_set({0.0, 1.0, 1.15}, 5.0, 0.1), admissibility_error);
}

TEST_CASE("tau ball example against a dense grid") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    const Point c = s.make({1.5, 0.0}), y = s.make({1.5, 0.05});
    const BallParams p{4 * pi, 0.2, 0.5, 0.2};
    bool oracle = true;
    for (const Interval& iv : tau_exclusion_set({0.0, two_pi}, p.T, p.rho))
        for (int k = 0; k <= 200000; ++k) {
            const double t = iv.lo + (iv.hi - iv.lo) * k / 200000.0;
            oracle = oracle && s.distance(annulus_closed_form(c, t), annulus_closed_form(y, t)) < p.eps;
        }
    CHECK(in_tau_ball(*sys, c, y, p) == oracle);
    CHECK(in_tau_ball(*sys, c, c, p));
    CHECK(tau_inclusion_applies(*sys, c, p));
    CHECK_FALSE(tau_inclusion_applies(*sys, c, {two_pi + 0.1, 0.2, 0.5, 0.2}));
    CHECK_FALSE(tau_inclusion_applies(*sys, c, {4 * pi, 0.2, 0.3, 0.2}));
}

TEST_CASE("ball inclusions on random triples") {
    auto sys = make_annulus();
    const auto& s = sys->space();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> r(1.0, 2.0), th(0.0, two_pi), small(-0.3, 0.3), T(0.5, 20.0);
    std::bernoulli_distribution ring(0.5);
    int bowen = 0, tau = 0;
    for (int i = 0; i < 400; ++i) {
        const Point c = s.make({ring(rng) ? 1.5 : r(rng), th(rng)});
        const Point y = s.make({ring(rng) ? 1.5 : std::clamp(c[0] + small(rng), 1.0, 2.0), c[1] + small(rng)});
        const BallParams p{T(rng), 0.1 + 0.2 * (i % 3), 0.5, 0.2};
        if (in_bowen_ball(*sys, c, y, p.T, p.eps, make_grid(p.delta, sys->base().time_step_hint()))) {
            ++bowen;
            CHECK(in_modified_ball(*sys, c, y, p));
        }
        if (tau_inclusion_applies(*sys, c, p) && in_tau_ball(*sys, c, y, p)) {
            ++tau;
            CHECK(in_modified_ball(*sys, c, y, p));
        }
    }
    CHECK(bowen > 20);
    CHECK(tau > 20);
}

TEST_CASE("engine tables agree with the single-pair predicates") {
    auto sys = make_annulus();
    const auto& s = dynamic_cast<const AnnulusSpace&>(sys->space());
    PointSet sample = s.sample_grid(0.4);
    for (const Point& p : s.ring_sample(1.5, 0.35)) sample.push_back(p);
    const std::vector<double> schedule{2.0, two_pi, 4 * pi};
    CountEngine eng(*sys, sample, schedule);
    const double eps = 0.3, delta = 0.5, rho = 0.2;
    const TimeGrid g = make_grid(delta, sys->base().time_step_hint());

    const auto mod = table_bits(eng.table(BallKind::modified, eps, delta));
    const auto bow = table_bits(eng.table(BallKind::bowen, eps, delta));
    const auto tau = table_bits(eng.table(BallKind::tau, eps, delta, rho));
    auto bit = [](const auto& m, std::size_t i, std::size_t j, std::size_t k) {
        auto it = m.find({i, j});
        return it != m.end() && ((it->second >> k) & 1);
    };
    std::size_t mismatches = 0, members = 0;
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = 0; j < sample.size(); ++j) {
            if (i == j) continue;
            for (std::size_t k = 0; k < schedule.size(); ++k) {
                const BallParams p{schedule[k], eps, delta, rho};
                const bool m = in_modified_ball(*sys, sample[i], sample[j], p);
                const bool b = in_bowen_ball(*sys, sample[i], sample[j], p.T, eps, g);
                const bool t = in_tau_ball(*sys, sample[i], sample[j], p);
                members += m + b + t;
                mismatches += (m != bit(mod, i, j, k)) + (b != bit(bow, i, j, k)) + (t != bit(tau, i, j, k));
            }
        }
    CHECK(members > 100);
    CHECK(mismatches == 0);

    // greedy admission replayed from the predicates
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const BallParams p{schedule[k], eps, delta, rho};
        const auto want = naive_greedy(sample.size(), [&](std::size_t a, std::size_t b) {
            return in_modified_ball(*sys, sample[a], sample[b], p);
        });
        CHECK(eng.separated(BallKind::modified, eps, delta, 0.0, k) == want);
    }
}

TEST_CASE("tau table on the expanding suspension matches a dense lattice oracle") {
    // No impulses: the tau ball of T asks for closeness at every lattice time in [rho, T].
    auto sys = make_doubling_suspension();
    const auto& s = dynamic_cast<const SuspensionSpace&>(sys->space());
    const PointSet sample = s.section_sample(200);
    const std::vector<double> schedule{2.0, 3.0, 4.0, 5.0};
    const double eps = 0.1, delta = 0.25, rho = 0.1;
    CountEngine eng(*sys, sample, schedule);
    const PairTable& table = eng.table(BallKind::tau, eps, delta, rho);
    const auto tau = table_bits(table);
    CHECK(table.candidates < sample.size() * (sample.size() - 1) / 2);

    const TimeGrid g = make_grid(delta, sys->base().time_step_hint());
    std::size_t mismatches = 0, members = 0;
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = i + 1; j < sample.size(); ++j) {
            std::uint64_t want = 0;
            bool close = true;
            std::size_t k = 0;
            for (long m = 1; k < schedule.size(); ++m) {
                const double t = g.fine(m);
                while (k < schedule.size() && schedule[k] < t) {
                    if (close && s.distance(sys->base().evolve(schedule[k], sample[i]),
                                            sys->base().evolve(schedule[k], sample[j])) < eps)
                        want |= 1ULL << k;
                    ++k;
                }
                if (t >= rho)
                    close = close && s.distance(sys->base().evolve(t, sample[i]), sys->base().evolve(t, sample[j])) < eps;
            }
            auto it = tau.find({i, j});
            const std::uint64_t got = it == tau.end() ? 0 : it->second;
            members += std::popcount(want);
            mismatches += got != want;
        }
    CHECK(members > 100);
    CHECK(mismatches == 0);
}

TEST_CASE("separated sets on the rotation circle match the interval oracle") {
    auto sys = make_rotation();
    const auto& s = dynamic_cast<const CircleSpace&>(sys->space());
    const PointSet sample = s.uniform_sample(360);
    for (double T : {1.0, 10.0}) {
        const BallParams p{T, 0.1, 0.0, 0.0};
        const auto e = greedy_max_separated(*sys, sample, p, BallKind::bowen);
        CHECK(e.size() == cyclic_mis(360, 0.1));
        const auto f = greedy_min_spanning(*sys, sample, p, BallKind::bowen);
        // balls hold every point within 5 steps, so a cover needs ceil(360 / 11) of them
        CHECK(f.size() >= 33 - 1);
        CHECK(f.size() <= 33 + 1);
    }
    const auto one = greedy_max_separated(*sys, {sample[0]}, {1.0, 0.1, 0.0, 0.0}, BallKind::bowen);
    CHECK(one == std::vector<std::size_t>{0});
    CHECK(greedy_min_spanning(*sys, {sample[0]}, {1.0, 0.1, 0.0, 0.0}, BallKind::bowen).size() == 1);

    const auto t = count_table(*sys, sample, {1.0, 5.0, 25.0}, 0.1, 0.5, 0.0, CountKind::separated);
    CHECK(t.counts[0] == t.counts[1]);
    CHECK(t.counts[1] == t.counts[2]);
}

TEST_CASE("every greedy separated set spans its sample") {
    auto sys = make_annulus();
    const PointSet sample = sys->space().sample_grid(0.15);
    std::vector<double> schedule;
    for (int k = 1; k <= 5; ++k) schedule.push_back(k * two_pi);
    CountEngine eng(*sys, sample, schedule);
    for (double eps : {0.2, 0.1})
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            for (BallKind b : {BallKind::modified, BallKind::bowen}) {
                const auto e = eng.separated(b, eps, 0.5, 0.0, k);
                CHECK(eng.uncovered(b, eps, 0.5, 0.0, k, e) == 0);
            }
            const auto f = eng.spanning(BallKind::modified, eps, 0.5, 0.0, k);
            CHECK(eng.uncovered(BallKind::modified, eps, 0.5, 0.0, k, f) == 0);
        }
}

TEST_CASE("annulus ring under Bowen balls is fully separated") {
    auto sys = make_annulus();
    const auto& s = dynamic_cast<const AnnulusSpace&>(sys->space());
    const PointSet ring = s.ring_sample(1.5, 0.05);
    const auto e = greedy_max_separated(*sys, ring, {4 * pi, 0.1, 0.0, 0.0}, BallKind::bowen);
    CHECK(e.size() == ring.size());
}

TEST_CASE("count chains on a coarse annulus grid") {
    auto sys = make_annulus();
    const PointSet sample = sys->space().sample_grid(0.1);
    std::vector<double> schedule;
    for (int k = 1; k <= 4; ++k) schedule.push_back(k * two_pi);
    CountEngine eng(*sys, sample, schedule, 0.1);
    for (double eps : {0.2, 0.1}) {
        const auto sep = eng.counts(CountKind::separated, eps, 0.5);
        const auto span = eng.counts(CountKind::spanning, eps, 0.5);
        const auto bow = eng.counts(CountKind::bowen_separated, eps, 0.5, 0.0, true);
        const auto tau = eng.counts(CountKind::tau_separated, eps, 0.5, 0.2, true);
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            CHECK(span.counts[k] <= sep.counts[k]);
            CHECK(sep.counts[k] <= bow.counts[k]);
            CHECK(sep.counts[k] <= tau.counts[k]);
            CHECK(span.lower_bounds[k] <= span.counts[k]);
            CHECK(static_cast<double>(sep.counts[k]) <= 8 * pi / (eps * eps));
            if (k > 0) CHECK(sep.counts[k] >= sep.counts[k - 1]);
        }
    }
    const auto coarse = eng.counts(CountKind::separated, 0.2, 0.5);
    const auto fine = eng.counts(CountKind::separated, 0.1, 0.5);
    for (std::size_t k = 0; k < schedule.size(); ++k) CHECK(coarse.counts[k] <= fine.counts[k]);
}

TEST_CASE("engine input validation") {
    auto sys = make_annulus();
    const PointSet sample = sys->space().sample_grid(0.5);
    CHECK_THROWS_AS(CountEngine(*sys, sample, {}), domain_error);
    CHECK_THROWS_AS(CountEngine(*sys, sample, {2.0, 1.0}), domain_error);
    CountEngine eng(*sys, sample, {1.0, 2.0});
    CHECK_THROWS_AS(eng.table(BallKind::modified, 0.1, 0.0), domain_error);
    CHECK_THROWS_AS(eng.table(BallKind::tau, 0.1, 0.5, 0.0), domain_error);
    CHECK_THROWS_AS(eng.separated(BallKind::modified, 0.1, 0.5, 0.0, 5), std::out_of_range);
}

TEST_CASE("growth rate fits") {
    CountTable t;
    t.schedule = {1, 2, 3, 4, 5};
    t.counts = {2, 4, 8, 16, 32};
    const auto e = fit_growth_rate(t, std::make_pair(1.0, 5.0));
    CHECK(e.rate == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(e.residual < 1e-12);
    CHECK(e.points == 5);

    // default window is the top half
    const auto top = fit_growth_rate(t);
    CHECK(top.t_min == 3.0);
    CHECK(top.t_max == 5.0);

    t.counts = {7, 7, 7, 7, 7};
    CHECK(fit_growth_rate(t, std::make_pair(1.0, 5.0)).rate == 0.0);

    // rescaling all counts leaves the slope
    t.counts = {3, 5, 9, 20, 41};
    CountTable scaled = t;
    for (auto& c : scaled.counts) c *= 6;
    CHECK(fit_growth_rate(scaled, std::make_pair(1.0, 5.0)).rate ==
          doctest::Approx(fit_growth_rate(t, std::make_pair(1.0, 5.0)).rate).epsilon(1e-12));

    // residual is the largest deviation from the fitted line
    const auto r = fit_log_series({0, 1, 2}, {0.0, 1.0, 0.0}, std::make_pair(0.0, 2.0));
    CHECK(r.rate == doctest::Approx(0.0));
    CHECK(r.residual == doctest::Approx(2.0 / 3.0));
    CHECK(r.unreliable);

    const auto neg = fit_log_series({0, 1, 2}, {2.0, 1.0, 0.0}, std::make_pair(0.0, 2.0));
    CHECK(neg.negative);
    CHECK(neg.reported_rate() == 0.0);

    CHECK_THROWS_AS(fit_log_series({1, 2}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_growth_rate(t, std::make_pair(4.0, 5.0)), std::invalid_argument);
}

TEST_CASE("entropy matrix on the rotation flow") {
    auto sys = make_rotation();
    const auto m = estimate_entropy(*sys, {0.05}, {0.2, 0.1}, {0.5, 0.25}, {1, 2, 4, 8, 16}, CountKind::separated);
    REQUIRE(m.cells.size() == 2);
    REQUIRE(m.cells[0].size() == 2);
    for (const auto& row : m.cells)
        for (const auto& c : row) CHECK(c.reported_rate() == 0.0);
    CHECK(m.headline.eps == 0.1);
    CHECK(m.headline.delta == 0.25);
    CHECK(m.tables.size() == 4);
    CHECK_THROWS_AS(estimate_entropy(*sys, {0.05}, {0.1, 0.2}, {0.5}, {1, 2, 4}, CountKind::separated),
                    std::invalid_argument);
}

TEST_CASE("csv output") {
    CountTable t;
    t.kind = CountKind::tau_separated;
    t.schedule = {1.5, 3};
    t.counts = {4, 9};
    t.eps = 0.1;
    t.delta = 0.5;
    t.rho = 0.2;
    t.sample_resolution = 0.02;
    std::ostringstream os;
    write_count_tables_csv(os, {t});
    CHECK(os.str() ==
          "kind,T,eps,delta,rho,sample_resolution,count\n"
          "tau-separated,1.5,0.1,0.5,0.2,0.02,4\n"
          "tau-separated,3,0.1,0.5,0.2,0.02,9\n");

    EntropyEstimate e;
    e.eps = 0.1;
    e.delta = 0.25;
    e.rate = 0.5;
    e.residual = 0.125;
    e.t_min = 4;
    e.t_max = 12;
    std::ostringstream es;
    write_estimates_csv(es, {e});
    CHECK(es.str() == "eps,delta,rate,residual,T_min,T_max\n0.1,0.25,0.5,0.125,4,12\n");

    CHECK(count_kind_from_string("bowen-spanning") == CountKind::bowen_spanning);
    CHECK_THROWS(count_kind_from_string("nope"));
}

TEST_CASE("swap improvement keeps separation and never shrinks") {
    auto sys = make_rotation();
    const auto& s = dynamic_cast<const CircleSpace&>(sys->space());
    const PointSet sample = s.uniform_sample(120);
    CountEngine eng(*sys, sample, {1.0});
    // points 0, 9, 18, ... block more room than needed (balls reach 5 steps at eps 0.3)
    std::vector<std::size_t> seeds;
    for (std::size_t i = 0; i < 120; i += 9) seeds.push_back(i);
    const auto e = eng.separated(BallKind::bowen, 0.3, 0.0, 0.0, 0, seeds);
    const auto better = eng.improve_separated(BallKind::bowen, 0.3, 0.0, 0.0, 0, e);
    CHECK(better.size() >= e.size());
    CHECK(std::is_sorted(better.begin(), better.end()));
    for (std::size_t a : better)
        for (std::size_t b : better)
            if (a != b) CHECK_FALSE(in_bowen_ball(*sys, sample[a], sample[b], 1.0, 0.3));
    CHECK(better.size() <= cyclic_mis(120, 0.3));
    CHECK_THROWS_AS(eng.improve_separated(BallKind::bowen, 0.3, 0.0, 0.0, 0, {0, 1}), std::invalid_argument);
}
