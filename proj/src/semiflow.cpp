#include "sfe/semiflow.hpp"

#include <algorithm>
#include <cmath>

namespace sfe {

SemiflowSystem::SemiflowSystem(std::shared_ptr<const MetricSpace> space, std::shared_ptr<const BaseSemiflow> base,
                               std::shared_ptr<const ImpulseSet> impulse, double xi, double eta, ImpulseOptions opts)
    : space_(std::move(space)),
      base_(std::move(base)),
      impulse_(std::move(impulse)),
      xi_(xi),
      eta_(eta),
      opts_(opts) {
    if (!space_ || !base_) throw domain_error("system needs a space and a base flow");
    if (impulse_ && !(xi_ > 0 && eta_ > 0)) throw domain_error("impulsive system needs xi > 0 and eta > 0");
}

double SemiflowSystem::proximity(const Point& x) const {
    if (!impulse_) return never;
    return impulse_->distance_to(x) - opts_.fuzz;
}

PointSet SemiflowSystem::impulse_sample() const {
    if (!impulse_) return {};
    return impulse_->sample(opts_.d_sample_resolution);
}

// --- impulses ----------------------------------------------------------------

namespace {

ContactSearch impulse_search(const SemiflowSystem& sys) {
    return {sys.base().time_step_hint(), sys.base().speed_bound(), sys.options().fuzz, sys.options().time_tol};
}

// Time of the next entry into D of the base orbit of y within (0, horizon].
Contact next_entry(const SemiflowSystem& sys, const Point& y, double horizon) {
    const ImpulseSet& d = *sys.impulse();
    const BaseSemiflow& f = sys.base();
    auto g = [&](double s) { return d.distance_to(f.evolve(s, y)); };
    return first_contact(g, 0.0, horizon, impulse_search(sys), sys.in_impulse_set(y));
}

}  // namespace

double first_impulse_time(const SemiflowSystem& sys, const Point& x, double horizon) {
    sys.space().check(x);
    if (!sys.impulsive()) return never;
    Contact c = next_entry(sys, x, horizon);
    if (c.stuck) throw degenerate_impulse("orbit does not leave the impulse set");
    return c.time ? *c.time : never;
}

ImpulseSchedule impulse_schedule(const SemiflowSystem& sys, const Point& x, double horizon) {
    sys.space().check(x);
    ImpulseSchedule out;
    out.truncated_at = horizon;
    if (!sys.impulsive()) return out;
    double t_base = 0.0;
    Point y = x;
    while (t_base < horizon) {
        Contact c = next_entry(sys, y, horizon - t_base);
        if (c.stuck) throw degenerate_impulse("orbit does not leave the impulse set");
        if (!c.time) break;
        const double t = t_base + *c.time;
        if (!out.times.empty() && !(t > out.times.back())) throw degenerate_impulse("impulse times stopped increasing");
        Point hit = sys.base().evolve(*c.time, y);
        y = sys.impulse()->jump(hit);
        out.times.push_back(t);
        out.points.push_back(hit);
        out.landings.push_back(y);
        if (out.times.size() > sys.options().max_impulses)
            throw runaway_impulses("more than " + std::to_string(sys.options().max_impulses) + " impulses before t = " +
                                   std::to_string(horizon));
        t_base = t;
    }
    return out;
}

Point impulsive_evolve(const SemiflowSystem& sys, const Point& x, double t) {
    if (t < 0) throw domain_error("impulsive_evolve: negative time");
    return Trajectory(sys, x, t).at(t);
}

Trajectory::Trajectory(const SemiflowSystem& sys, const Point& x, double horizon)
    : sys_(&sys), x0_(x), sched_(impulse_schedule(sys, x, horizon)) {}

std::size_t Trajectory::segment(double t) const {
    return static_cast<std::size_t>(std::upper_bound(sched_.times.begin(), sched_.times.end(), t) -
                                    sched_.times.begin());
}

Point Trajectory::at(double t) const {
    if (t > sched_.truncated_at + 1e-9) throw domain_error("trajectory evaluated beyond its horizon");
    const std::size_t n = segment(t);
    if (n == 0) return sys_->base().evolve(t, x0_);
    return sys_->base().evolve(t - sched_.times[n - 1], sched_.landings[n - 1]);
}

// --- regions -----------------------------------------------------------------

const char* to_string(Region r) {
    switch (r) {
        case Region::in_d: return "IN_D";
        case Region::in_d_xi: return "IN_D_XI";
        case Region::in_x_xi: return "IN_X_XI";
    }
    return "?";
}

namespace {

ContactSearch tube_search(const SemiflowSystem& sys) {
    double step = std::min(sys.base().time_step_hint(), sys.xi() / 8);
    return {step, sys.base().speed_bound(), sys.options().fuzz, sys.options().time_tol};
}

}  // namespace

Region region_membership_forward(const SemiflowSystem& sys, const Point& x, const PointSet& d_sample) {
    if (!sys.impulsive()) return Region::in_x_xi;
    if (sys.in_impulse_set(x)) return Region::in_d;
    const MetricSpace& m = sys.space();
    const BaseSemiflow& f = sys.base();
    const ContactSearch cs = tube_search(sys);
    for (const Point& d : d_sample) {
        auto g = [&](double s) { return m.distance(f.evolve(s, d), x); };
        Contact c = first_contact(g, 0.0, sys.xi(), cs, true);
        if (c.time && *c.time < sys.xi()) return Region::in_d_xi;
    }
    return Region::in_x_xi;
}

Region region_membership(const SemiflowSystem& sys, const Point& x) {
    sys.space().check(x);
    if (!sys.impulsive()) return Region::in_x_xi;
    if (sys.in_impulse_set(x)) return Region::in_d;
    const BaseSemiflow& f = sys.base();
    if (!f.evolve_back(0.0, x)) return region_membership_forward(sys, x, sys.impulse_sample());
    const ImpulseSet& d = *sys.impulse();
    auto g = [&](double s) { return d.distance_to(*f.evolve_back(s, x)); };
    Contact c = first_contact(g, 0.0, sys.xi(), tube_search(sys), false);
    if (c.time && *c.time > 0.0 && *c.time < sys.xi()) return Region::in_d_xi;
    return Region::in_x_xi;
}

// --- regularity --------------------------------------------------------------

bool RegularityReport::regular() const { return first_failure().empty(); }

std::string RegularityReport::first_failure() const {
    if (!disjoint.pass) return "(a) I(D) meets D";
    if (!lipschitz.pass) return "(b) jump map not Lipschitz on the D sample";
    if (!xi_bound.pass) return "(c) xi >= eta/4";
    if (!tube_exit.pass) return "(d) flow_xi(D_xi) leaves X_xi";
    if (!no_return.pass) return "(e) jumped orbit returns to I(D) within xi";
    if (!open_tube.pass) return "D_xi not open at fuzz scale";
    return {};
}

RegularityReport check_regularity(const SemiflowSystem& sys) {
    RegularityReport rep;
    if (!sys.impulsive()) {
        rep.disjoint.detail = rep.lipschitz.detail = "no impulse set";
        return rep;
    }
    const MetricSpace& m = sys.space();
    const BaseSemiflow& f = sys.base();
    const ImpulseSet& imp = *sys.impulse();
    const double fuzz = sys.options().fuzz;
    const PointSet ds = sys.impulse_sample();
    PointSet jumped;
    for (const Point& d : ds) jumped.push_back(imp.jump(d));

    double clearance = never;
    for (const Point& q : jumped) clearance = std::min(clearance, imp.distance_to(q));
    rep.disjoint.witness = clearance;
    rep.disjoint.pass = clearance > fuzz;

    double lip = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = i + 1; j < ds.size(); ++j) {
            double dd = m.distance(ds[i], ds[j]);
            if (dd > fuzz) lip = std::max(lip, m.distance(jumped[i], jumped[j]) / dd);
        }
    rep.lipschitz.witness = lip;
    rep.lipschitz.pass = lip < 1e6;
    if (ds.size() < 2) rep.lipschitz.detail = "single-point D sample, estimate vacuous";

    rep.xi_bound.witness = sys.xi() - sys.eta() / 4;
    rep.xi_bound.pass = sys.xi() > 0 && sys.xi() < sys.eta() / 4;

    // (d) and openness on tube points flow_s(d), s inside (0, xi).
    std::size_t exits = 0, holes = 0, probes = 0;
    for (const Point& d : ds) {
        for (int k = 1; k < 8; ++k) {
            Point y = f.evolve(sys.xi() * k / 8.0, d);
            if (region_membership(sys, f.evolve(sys.xi(), y)) != Region::in_x_xi) ++exits;
            for (const Point& z : m.neighbors(y, 0.5 * fuzz)) {
                ++probes;
                if (region_membership(sys, z) != Region::in_d_xi) ++holes;
            }
        }
    }
    rep.tube_exit.witness = static_cast<double>(exits);
    rep.tube_exit.pass = exits == 0;
    rep.open_tube.witness = static_cast<double>(holes);
    rep.open_tube.pass = holes == 0;
    rep.open_tube.detail = std::to_string(probes) + " neighborhood probes at radius fuzz/2";

    // (e) orbits of jumped points stay off I(D) for t in (0, xi].
    std::size_t returns = 0;
    const ContactSearch cs = tube_search(sys);
    for (const Point& q : jumped) {
        auto g = [&](double s) {
            Point z = f.evolve(s, q);
            double best = never;
            for (const Point& j : jumped) best = std::min(best, m.distance(z, j));
            return best;
        };
        Contact c = first_contact(g, 0.0, sys.xi(), cs, true);
        if (c.stuck || c.time) ++returns;
    }
    rep.no_return.witness = static_cast<double>(returns);
    rep.no_return.pass = returns == 0;

    // Finite-sample surrogate for continuity of tau* on X_xi u D: compare capped
    // first impulse times of points approaching D with nearby perturbations.
    const double cap = 1.0;
    auto tau_star = [&](const Point& x) {
        if (sys.in_impulse_set(x)) return 0.0;
        return std::min(first_impulse_time(sys, x, cap), cap);
    };
    double modulus = 0.0;
    for (const Point& d : ds) {
        for (double s : {0.05, 0.1, 0.2}) {
            auto back = f.evolve_back(s, d);
            if (!back) continue;
            double t0 = tau_star(*back);
            for (const Point& z : m.neighbors(*back, 1e-3)) modulus = std::max(modulus, std::abs(tau_star(z) - t0));
        }
    }
    rep.tau_star_modulus = modulus;
    return rep;
}

std::size_t forward_invariance_violations(const SemiflowSystem& sys, const PointSet& sample,
                                          const std::vector<double>& t_grid) {
    for (const Point& x : sample)
        if (region_membership(sys, x) != Region::in_x_xi)
            throw domain_error("forward invariance: sample point outside X_xi");
    if (t_grid.empty()) return 0;
    const double horizon = *std::max_element(t_grid.begin(), t_grid.end());
    std::size_t bad = 0;
    for (const Point& x : sample) {
        Trajectory tr(sys, x, horizon);
        for (double t : t_grid)
            if (region_membership(sys, tr.at(t)) != Region::in_x_xi) ++bad;
    }
    return bad;
}

bool forward_invariance_check(const SemiflowSystem& sys, const PointSet& sample, const std::vector<double>& t_grid) {
    return forward_invariance_violations(sys, sample, t_grid) == 0;
}

}  // namespace sfe
