#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfe/metric_space.hpp"

namespace sfe {

inline constexpr double never = std::numeric_limits<double>::infinity();

class BaseSemiflow {
public:
    virtual ~BaseSemiflow() = default;
    virtual Point evolve(double t, const Point& x) const = 0;
    virtual double time_step_hint() const = 0;
    // Bound on the speed of every orbit in the embedding.
    virtual double speed_bound() const = 0;
    // d(evolve(t,x), evolve(t,y)) does not depend on t.
    virtual bool isometric() const { return false; }
    // The y with evolve(t, y) = x, for invertible flows only.
    virtual std::optional<Point> evolve_back(double /*t*/, const Point& /*x*/) const { return std::nullopt; }
};

// Impulse set D together with the jump map I defined on it.
class ImpulseSet {
public:
    virtual ~ImpulseSet() = default;
    virtual double distance_to(const Point& x) const = 0;
    virtual Point jump(const Point& x) const = 0;
    virtual PointSet sample(double resolution) const = 0;
    // Declared lower bound on gaps between consecutive impulses, 0 if unknown.
    virtual double min_impulse_gap() const { return 0.0; }
};

struct ImpulseOptions {
    double fuzz = 1e-7;
    double time_tol = 1e-10;
    std::size_t max_impulses = 1'000'000;
    double d_sample_resolution = 0.01;
};

class SemiflowSystem {
public:
    SemiflowSystem(std::shared_ptr<const MetricSpace> space, std::shared_ptr<const BaseSemiflow> base,
                   std::shared_ptr<const ImpulseSet> impulse = nullptr, double xi = 0.0, double eta = 0.0,
                   ImpulseOptions opts = {});

    const MetricSpace& space() const { return *space_; }
    const BaseSemiflow& base() const { return *base_; }
    const ImpulseSet* impulse() const { return impulse_.get(); }
    const std::shared_ptr<const MetricSpace>& space_ptr() const { return space_; }
    const std::shared_ptr<const BaseSemiflow>& base_ptr() const { return base_; }
    const std::shared_ptr<const ImpulseSet>& impulse_ptr() const { return impulse_; }

    bool impulsive() const { return impulse_ != nullptr; }
    double xi() const { return xi_; }
    double eta() const { return eta_; }
    const ImpulseOptions& options() const { return opts_; }

    // Signed proximity to D: negative inside the fuzz band, +inf without impulses.
    double proximity(const Point& x) const;
    bool in_impulse_set(const Point& x) const { return proximity(x) <= 0.0; }
    PointSet impulse_sample() const;
    double min_impulse_gap() const { return impulse_ ? impulse_->min_impulse_gap() : never; }

private:
    std::shared_ptr<const MetricSpace> space_;
    std::shared_ptr<const BaseSemiflow> base_;
    std::shared_ptr<const ImpulseSet> impulse_;
    double xi_;
    double eta_;
    ImpulseOptions opts_;
};

class degenerate_impulse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class runaway_impulses : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- contact search ----------------------------------------------------------

struct ContactSearch {
    double step;
    double speed;  // Lipschitz bound of g, <= 0 when unknown
    double fuzz;
    double time_tol;
};

struct Contact {
    std::optional<double> time;
    bool stuck = false;  // started inside and still inside one step later
};

namespace detail {

template <class G>
std::pair<double, double> golden_min(G& g, double a, double b, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - (b - a) * inv_phi, d = a + (b - a) * inv_phi;
    double fc = g(c), fd = g(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = g(d);
        }
    }
    double m = 0.5 * (a + b);
    return {m, g(m)};
}

}  // namespace detail

// First local minimum of g in (t0, t1] whose value is within the fuzz band.
// g is sampled on a grid of the given step (and one step past t1 so that
// minima at the horizon are located properly), candidate brackets are refined
// by golden section to time_tol. With skip_start, a contact at t0 itself is
// ignored (the orbit starts on the target and leaves it).
template <class G>
Contact first_contact(G&& g, double t0, double t1, const ContactSearch& cs, bool skip_start) {
    Contact out;
    if (!(t1 > t0)) return out;
    const double step = cs.step;
    const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / step)) + 1;
    auto time_at = [&](std::size_t i) { return t0 + static_cast<double>(i) * step; };

    double g_prev = std::numeric_limits<double>::infinity();
    double g_cur = g(t0);
    bool suppress_start = false;
    if (g_cur <= cs.fuzz) {
        if (skip_start) {
            suppress_start = true;
            if (g(t0 + step) <= cs.fuzz) {
                out.stuck = true;
                return out;
            }
        } else {
            out.time = t0;
            return out;
        }
    }
    for (std::size_t i = 0; i <= n; ++i) {
        const double g_next = (i < n) ? g(time_at(i + 1)) : std::numeric_limits<double>::infinity();
        const bool is_min = g_cur <= g_prev && g_cur <= g_next;
        const bool skip = i == 0 && suppress_start;
        const bool near = cs.speed <= 0 || g_cur - cs.speed * step <= cs.fuzz;
        if (is_min && near && !skip) {
            const double a = (i == 0) ? t0 : time_at(i - 1);
            const double b = (i < n) ? time_at(i + 1) : time_at(i);
            auto [tm, gm] = detail::golden_min(g, a, b, cs.time_tol);
            if (gm <= cs.fuzz && tm > t0) {
                if (tm <= t1) out.time = tm;
                return out;
            }
        }
        g_prev = g_cur;
        g_cur = g_next;
    }
    return out;
}

// --- impulsive trajectories --------------------------------------------------

struct ImpulseSchedule {
    std::vector<double> times;  // tau_n, strictly increasing
    PointSet points;            // x^n, in D
    PointSet landings;          // I(x^n)
    double truncated_at = 0.0;
};

double first_impulse_time(const SemiflowSystem& sys, const Point& x, double horizon);
ImpulseSchedule impulse_schedule(const SemiflowSystem& sys, const Point& x, double horizon);
Point impulsive_evolve(const SemiflowSystem& sys, const Point& x, double t);

// Orbit of a point with its impulse schedule precomputed up to a horizon.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(const SemiflowSystem& sys, const Point& x, double horizon);

    // Right-continuous: at an impulse time the post-jump branch is returned.
    Point at(double t) const;
    const Point& start() const { return x0_; }
    const std::vector<double>& events() const { return sched_.times; }
    const ImpulseSchedule& schedule() const { return sched_; }
    double horizon() const { return sched_.truncated_at; }
    // Number of impulses at times <= t.
    std::size_t segment(double t) const;

private:
    const SemiflowSystem* sys_ = nullptr;
    Point x0_;
    ImpulseSchedule sched_;
};

// --- regions and regularity --------------------------------------------------

enum class Region { in_d, in_d_xi, in_x_xi };

const char* to_string(Region r);

// Classifies x by backward shooting when the base flow is invertible, otherwise
// by forward search from a sample of D.
Region region_membership(const SemiflowSystem& sys, const Point& x);
Region region_membership_forward(const SemiflowSystem& sys, const Point& x, const PointSet& d_sample);

struct ClauseResult {
    bool pass = true;
    double witness = 0.0;
    std::string detail;
};

struct RegularityReport {
    ClauseResult disjoint;    // (a) I(D) and D apart, witness = clearance
    ClauseResult lipschitz;   // (b) witness = Lipschitz estimate
    ClauseResult xi_bound;    // (c) xi < eta / 4, witness = xi - eta/4
    ClauseResult tube_exit;   // (d) flow_xi(D_xi) inside X_xi, witness = violations
    ClauseResult no_return;   // (e) jumped points avoid I(D) for t in (0, xi]
    ClauseResult open_tube;   // interiority of D_xi at fuzz scale
    double tau_star_modulus = 0.0;  // diagnostic only

    bool regular() const;
    // Name of the first failing clause, empty when regular.
    std::string first_failure() const;
};

RegularityReport check_regularity(const SemiflowSystem& sys);

// Throws domain_error when a sample point is not in X_xi.
std::size_t forward_invariance_violations(const SemiflowSystem& sys, const PointSet& sample,
                                          const std::vector<double>& t_grid);
bool forward_invariance_check(const SemiflowSystem& sys, const PointSet& sample, const std::vector<double>& t_grid);

}  // namespace sfe
