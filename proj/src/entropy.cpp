#include "sfe/entropy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace sfe {

// --- names -------------------------------------------------------------------

const char* to_string(CountKind k) {
    switch (k) {
        case CountKind::separated: return "separated";
        case CountKind::spanning: return "spanning";
        case CountKind::bowen_separated: return "bowen-separated";
        case CountKind::bowen_spanning: return "bowen-spanning";
        case CountKind::tau_separated: return "tau-separated";
    }
    return "?";
}

CountKind count_kind_from_string(const std::string& s) {
    for (CountKind k : {CountKind::separated, CountKind::spanning, CountKind::bowen_separated,
                        CountKind::bowen_spanning, CountKind::tau_separated})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown count kind '" + s + "'");
}

BallKind ball_of(CountKind k) {
    switch (k) {
        case CountKind::separated:
        case CountKind::spanning: return BallKind::modified;
        case CountKind::bowen_separated:
        case CountKind::bowen_spanning: return BallKind::bowen;
        case CountKind::tau_separated: return BallKind::tau;
    }
    return BallKind::modified;
}

bool is_spanning(CountKind k) { return k == CountKind::spanning || k == CountKind::bowen_spanning; }

// --- grids -------------------------------------------------------------------

TimeGrid make_grid(double delta, double hint) {
    if (!(delta > 0)) throw domain_error("time grid needs delta > 0");
    if (!(hint > 0)) throw domain_error("time grid needs a positive step hint");
    TimeGrid g;
    g.delta = delta;
    g.n_in = std::max(32, static_cast<int>(std::ceil(delta / hint - 1e-12)));
    g.h_in = delta / g.n_in;
    g.q = std::max(1, static_cast<int>(std::floor(std::min(delta / 2, hint) / g.h_in + 1e-9)));
    return g;
}

namespace {

// Bytes of single-precision orbit embeddings kept by a count engine.
constexpr std::size_t orbit_cache_budget = std::size_t{3} << 29;

// Bowen checks with no window: the flow's hint is the step.
TimeGrid point_grid(double step) {
    TimeGrid g;
    g.delta = 0.0;
    g.n_in = 1;
    g.h_in = step;
    g.q = 1;
    return g;
}

// Lattice for tau samples when no window length is given.
TimeGrid tau_grid(const SemiflowSystem& sys, const BallParams& p) {
    return make_grid(p.delta > 0 ? p.delta : 2 * p.rho, sys.base().time_step_hint());
}

long first_index_at_or_after(const TimeGrid& g, long stride, double t) {
    const double unit = g.h_in * stride;
    long k = std::max(0L, static_cast<long>(std::floor(t / unit)));
    while (g.fine(k * stride) < t) ++k;
    while (k > 0 && g.fine((k - 1) * stride) >= t) --k;
    return k;
}

bool in_zone(const std::vector<double>& centers, double rho, double s) {
    auto it = std::upper_bound(centers.begin(), centers.end(), s + rho);
    // Candidates are the centers c with c < s + rho; the zone is open.
    while (it != centers.begin()) {
        --it;
        if (*it <= s - rho) break;
        if (s > *it - rho && s < *it + rho) return true;
    }
    return false;
}

bool in_j(const std::vector<double>& centers, double rho, double s) { return s > 0 && !in_zone(centers, rho, s); }

void check_gaps(const std::vector<double>& times, double rho) {
    for (std::size_t i = 1; i + 1 < times.size(); ++i)
        if (times[i + 1] - times[i] < 2 * rho)
            throw admissibility_error("impulse gap " + std::to_string(times[i + 1] - times[i]) + " below 2 rho = " +
                                      std::to_string(2 * rho));
}

}  // namespace

// --- pair scanner ------------------------------------------------------------

PairScanner::PairScanner(const SemiflowSystem& sys, const Trajectory& a, const Trajectory& b,
                         const PairMetric* metric)
    : sys_(sys), a_(a), b_(b), metric_(metric), iso_(sys.base().isometric()) {
    const auto& ea = a.events();
    const auto& eb = b.events();
    events_.reserve(ea.size() + eb.size());
    std::merge(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(events_));
    events_.erase(std::unique(events_.begin(), events_.end()), events_.end());
}

double PairScanner::space_dist(double t) const { return sys_.space().distance(a_.at(t), b_.at(t)); }

double PairScanner::dist(double t) const {
    if (metric_) return metric_->distance(a_.at(t), b_.at(t));
    return space_dist(t);
}

void PairScanner::attach(const float* a, const float* b, long count, long stride, double band) {
    cache_a_ = a;
    cache_b_ = b;
    cache_count_ = count;
    cache_stride_ = stride;
    cache_band_ = band;
}

double PairScanner::lattice_dist(const TimeGrid& g, long m, double eps) const {
    if (cache_a_ && !metric_ && m % cache_stride_ == 0 && m / cache_stride_ < cache_count_) {
        const std::size_t E = sys_.space().embed_dim();
        const float* a = cache_a_ + (m / cache_stride_) * E;
        const float* b = cache_b_ + (m / cache_stride_) * E;
        double s = 0.0;
        for (std::size_t c = 0; c < E; ++c) {
            const double d = static_cast<double>(a[c]) - static_cast<double>(b[c]);
            s += d * d;
        }
        const double v = std::sqrt(s);
        if (std::abs(v - eps) > cache_band_) return v - cache_band_;
    }
    return dist(g.fine(m));
}

double PairScanner::seg_end(double t) const {
    auto it = std::upper_bound(events_.begin(), events_.end(), t);
    return it == events_.end() ? never : *it;
}

double PairScanner::window_min(const TimeGrid& g, double t) const {
    const long m = std::lround(t / g.h_in);
    const bool lattice = g.fine(m) == t;
    auto it = std::lower_bound(events_.begin(), events_.end(), t);
    const auto end = std::lower_bound(it, events_.end(), t + g.delta);
    if (constant_segments() && !metric_) {
        double best = space_dist(t);
        for (auto e = it; e != end; ++e) best = std::min(best, space_dist(*e));
        return best;
    }
    double best = never;
    for (int j = 0; j < g.n_in; ++j) best = std::min(best, dist(lattice ? g.fine(m + j) : t + j * g.h_in));
    for (auto e = it; e != end; ++e) best = std::min(best, dist(*e));
    return best;
}

bool PairScanner::window_passes(const TimeGrid& g, double t, double eps) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), t);
    const auto end = std::lower_bound(it, events_.end(), t + g.delta);
    if (constant_segments()) {
        // The space distance bounds the pair distance and is frozen between events.
        if (space_dist(t) < eps) return true;
        for (auto e = it; e != end; ++e)
            if (space_dist(*e) < eps) return true;
        if (!metric_) return false;
    }
    const long m = std::lround(t / g.h_in);
    const bool lattice = g.fine(m) == t;
    if (lattice && it == end) return smooth_window(g, m, eps, [&](long i) { return lattice_dist(g, i, eps); });
    for (int j = 0; j < g.n_in; ++j)
        if ((lattice ? lattice_dist(g, m + j, eps) : dist(t + j * g.h_in)) < eps) return true;
    for (auto e = it; e != end; ++e)
        if (dist(*e) < eps) return true;
    return false;
}

double PairScanner::exclusion_radius(double v, double eps, double h) const {
    // Both orbits move at most `speed` per unit time between impulses, so the
    // pair distance stays at or above eps within (v - eps) / (2 speed) of a
    // sample at distance v. Measured in lattice steps.
    const double rate = 2.0 * sys_.base().speed_bound() * (1.0 + 1e-6) * h;
    if (!(rate > 0)) return 0.0;
    return (v - eps) / rate;
}

template <class F>
bool PairScanner::smooth_window(const TimeGrid& g, long m, double eps, F&& value) const {
    // Samples on the outer lattice are usually cached: look at them first and
    // let each miss rule out its Lipschitz neighbourhood.
    double radius[64];
    int at[64];
    int n = 0;
    const long first = ((m + g.q - 1) / g.q) * g.q - m;
    for (long j = first; j < g.n_in; j += g.q) {
        const double v = value(m + j);
        if (v < eps) return true;
        if (n < 64) {
            at[n] = static_cast<int>(j);
            radius[n++] = exclusion_radius(v, eps, g.h_in);
        }
    }
    for (int j = 0; j < g.n_in; ++j) {
        bool ruled_out = false;
        for (int k = 0; k < n && !ruled_out; ++k) ruled_out = std::abs(j - at[k]) < radius[k];
        if (ruled_out) continue;
        const double v = value(m + j);
        if (v < eps) return true;
        if (n < 64) {
            at[n] = j;
            radius[n++] = exclusion_radius(v, eps, g.h_in);
        }
    }
    return false;
}

double PairScanner::bowen_exit(const TimeGrid& g, double eps, double t_max) const {
    // Check times are the outer lattice together with every impulse time.
    const long q = g.q;
    std::size_t p = 0;
    long k = 0;
    while (true) {
        const double tk = g.fine(k * q);
        const double te = p < events_.size() ? events_[p] : never;
        const double t = std::min(tk, te);
        if (t > t_max) return never;
        if (constant_segments() && space_dist(t) < eps) {
            const double b = seg_end(t);
            if (b > t_max) return never;
            k = first_index_at_or_after(g, q, b);
            p = static_cast<std::size_t>(std::lower_bound(events_.begin(), events_.end(), b) - events_.begin());
            continue;
        }
        if ((tk == t ? lattice_dist(g, k * q, eps) : dist(t)) >= eps) return t;
        if (tk <= t) ++k;
        if (te <= t) ++p;
    }
}

double PairScanner::modified_exit(const TimeGrid& g, double eps, double t_max) const {
    const long q = g.q;
    long k = 0;
    // Window samples overlap between neighbouring outer times; remember the
    // lattice values already computed.
    const long ring = g.n_in + q;
    std::vector<double> cache_val(ring);
    std::vector<long> cache_tag(ring, -1);
    auto cached_dist = [&](long m) {
        const long slot = m % ring;
        if (cache_tag[slot] != m) {
            cache_tag[slot] = m;
            cache_val[slot] = lattice_dist(g, m, eps);
        }
        return cache_val[slot];
    };
    while (true) {
        const double t = g.fine(k * q);
        if (t > t_max) return never;
        if (constant_segments()) {
            if (space_dist(t) < eps) {
                const double b = seg_end(t);
                if (b > t_max) return never;
                k = first_index_at_or_after(g, q, b);
                continue;
            }
            if (!window_passes(g, t, eps)) return t;
            ++k;
            continue;
        }
        bool pass = false;
        auto it = std::lower_bound(events_.begin(), events_.end(), t);
        const bool smooth = it == events_.end() || *it >= t + g.delta;
        if (smooth) {
            pass = smooth_window(g, k * q, eps, cached_dist);
        } else {
            for (int j = 0; j < g.n_in && !pass; ++j) pass = cached_dist(k * q + j) < eps;
            for (; !pass && it != events_.end() && *it < t + g.delta; ++it) pass = dist(*it) < eps;
        }
        if (!pass) return t;
        ++k;
    }
}

namespace {

// Tau sample times in [lo, hi): lattice, impulse times and impulse-anchored offsets.
void tau_samples(const TimeGrid& g, const std::vector<double>& events, double lo, double hi,
                 std::vector<double>& out) {
    out.clear();
    for (long m = first_index_at_or_after(g, 1, lo); g.fine(m) < hi; ++m) out.push_back(g.fine(m));
    auto it = std::upper_bound(events.begin(), events.end(), lo - g.delta);
    for (; it != events.end() && *it < hi; ++it) {
        if (*it >= lo) out.push_back(*it);
        for (int j = 1; j < g.n_in; ++j) {
            const double s = *it + j * g.h_in;
            if (s >= lo && s < hi) out.push_back(s);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace

double PairScanner::tau_exit(const TimeGrid& g, const std::vector<double>& center_times, double rho, double eps,
                             double t_max) const {
    std::vector<double> qs;
    const double top = std::nextafter(t_max, never);
    double a = 0.0;
    while (a <= t_max) {
        const double b = std::min(seg_end(a), top);
        if (constant_segments() && space_dist(a) < eps) {
            a = b;
            continue;
        }
        // Sampled in chunks: most scans stop early. Inside [a, b) both orbits
        // are smooth, so a sample at distance v < eps keeps the pair closer
        // than eps for (eps - v) / (2 speed) and later samples there are skipped.
        const double speed = 2.0 * sys_.base().speed_bound() * (1.0 + 1e-6);
        double safe_until = a;
        const double chunk = std::max(4 * g.delta, 64 * g.h_in);
        for (double lo = a; lo < b; lo += chunk) {
            tau_samples(g, events_, lo, std::min(b, lo + chunk), qs);
            for (double s : qs) {
                if (s < safe_until || !in_j(center_times, rho, s)) continue;
                if (constant_segments() && !metric_) return s;
                const long m = std::lround(s / g.h_in);
                const bool lattice = g.fine(m) == s;
                const double v = lattice ? lattice_dist(g, m, eps) : dist(s);
                if (v >= eps) return s;
                if (!metric_ && speed > 0) {
                    const double upper = lattice ? v + 2 * cache_band_ : v;
                    safe_until = s + (eps - upper) / speed;
                }
            }
        }
        a = b;
    }
    return never;
}

// --- single-pair predicates --------------------------------------------------

double ddelta(const SemiflowSystem& sys, const Point& x, const Point& y, double delta) {
    const TimeGrid g = make_grid(delta, sys.base().time_step_hint());
    Trajectory tx(sys, x, delta), ty(sys, y, delta);
    return PairScanner(sys, tx, ty, nullptr).window_min(g, 0.0);
}

bool in_modified_ball(const SemiflowSystem& sys, const Point& center, const Point& y, const BallParams& p) {
    if (!(p.T >= 0) || !(p.eps > 0)) throw domain_error("ball needs T >= 0 and eps > 0");
    const TimeGrid g = make_grid(p.delta, sys.base().time_step_hint());
    Trajectory tc(sys, center, p.T + p.delta), ty(sys, y, p.T + p.delta);
    PairScanner sc(sys, tc, ty, nullptr);
    return sc.modified_exit(g, p.eps, p.T) > p.T && sc.window_passes(g, p.T, p.eps);
}

bool in_bowen_ball(const SemiflowSystem& sys, const Point& center, const Point& y, double T, double eps,
                   const TimeGrid& g) {
    if (!(T >= 0) || !(eps > 0)) throw domain_error("ball needs T >= 0 and eps > 0");
    Trajectory tc(sys, center, T), ty(sys, y, T);
    PairScanner sc(sys, tc, ty, nullptr);
    return sc.bowen_exit(g, eps, T) > T && sc.dist(T) < eps;
}

bool in_bowen_ball(const SemiflowSystem& sys, const Point& center, const Point& y, double T, double eps,
                   double step) {
    return in_bowen_ball(sys, center, y, T, eps, point_grid(step > 0 ? step : sys.base().time_step_hint()));
}

std::vector<double> tau_times(const SemiflowSystem& sys, const Point& x, double horizon) {
    if (!sys.impulsive()) throw domain_error("tau_times needs an impulsive system");
    std::vector<double> out{0.0};
    for (double t : impulse_schedule(sys, x, horizon).times) out.push_back(t);
    return out;
}

std::vector<Interval> tau_exclusion_set(const std::vector<double>& times, double T, double rho) {
    if (!(rho > 0)) throw domain_error("tau exclusion needs rho > 0");
    std::vector<double> c = times;
    if (c.empty() || c.front() != 0.0) c.insert(c.begin(), 0.0);
    check_gaps(c, rho);
    std::vector<Interval> out;
    double lo = c.front() + rho;  // tau_0 = 0 cuts the left end
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double hi = std::min(c[i] - rho, T);
        if (lo <= hi) out.push_back({lo, hi});
        lo = std::max(lo, c[i] + rho);
    }
    if (lo <= T) out.push_back({lo, T});
    return out;
}

bool in_tau_ball(const SemiflowSystem& sys, const Point& center, const Point& y, const BallParams& p) {
    if (!(p.rho > 0)) throw domain_error("tau ball needs rho > 0");
    if (!(p.T >= 0) || !(p.eps > 0)) throw domain_error("ball needs T >= 0 and eps > 0");
    const TimeGrid g = tau_grid(sys, p);
    const double horizon = p.T + p.rho;
    Trajectory tc(sys, center, horizon), ty(sys, y, horizon);
    std::vector<double> centers{0.0};
    centers.insert(centers.end(), tc.events().begin(), tc.events().end());
    check_gaps(centers, p.rho);
    PairScanner sc(sys, tc, ty, nullptr);
    if (!(sc.tau_exit(g, centers, p.rho, p.eps, p.T) > p.T)) return false;
    return !in_j(centers, p.rho, p.T) || sc.dist(p.T) < p.eps;
}

bool tau_inclusion_applies(const SemiflowSystem& sys, const Point& center, const BallParams& p) {
    if (!(p.rho > 0) || !(p.delta > 0)) return false;
    const TimeGrid g = make_grid(p.delta, sys.base().time_step_hint());
    const double need = 2 * p.rho + g.h_in;
    if (!(p.delta > need)) return false;
    if (sys.impulsive() && !(sys.min_impulse_gap() > need)) return false;
    std::vector<double> c{0.0};
    if (sys.impulsive()) c = tau_times(sys, center, p.T + p.delta);
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        if (!(c[i + 1] - c[i] > need)) return false;
    for (double t : c)
        if (p.T >= t - p.rho && p.T < t + p.rho + g.h_in) return false;
    return true;
}

// --- candidate pairs ---------------------------------------------------------

namespace {

// kd-tree over axis-aligned boxes; reports boxes whose per-axis gap to a query
// box stays below eps on every axis.
class BoxTree {
public:
    BoxTree(std::size_t dims, const std::vector<double>& lo, const std::vector<double>& hi,
            std::vector<std::uint32_t> members)
        : d_(dims), lo_(lo), hi_(hi), idx_(std::move(members)) {
        if (!idx_.empty()) build(0, static_cast<std::uint32_t>(idx_.size()));
    }

    template <class F>
    void query(const double* qlo, const double* qhi, double eps, F&& visit) const {
        if (nodes_.empty()) return;
        std::vector<std::uint32_t> stack{0};
        while (!stack.empty()) {
            const Node& nd = nodes_[stack.back()];
            const double* blo = &nlo_[static_cast<std::size_t>(stack.back()) * d_];
            const double* bhi = &nhi_[static_cast<std::size_t>(stack.back()) * d_];
            stack.pop_back();
            bool cut = false;
            for (std::size_t k = 0; k < d_ && !cut; ++k) cut = blo[k] > qhi[k] + eps || bhi[k] < qlo[k] - eps;
            if (cut) continue;
            if (nd.left < 0) {
                for (std::uint32_t p = nd.begin; p < nd.end; ++p) visit(idx_[p]);
            } else {
                stack.push_back(static_cast<std::uint32_t>(nd.left));
                stack.push_back(static_cast<std::uint32_t>(nd.right));
            }
        }
    }

private:
    struct Node {
        std::uint32_t begin, end;
        int left = -1, right = -1;
    };

    int build(std::uint32_t b, std::uint32_t e) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({b, e});
        nlo_.resize(nlo_.size() + d_, never);
        nhi_.resize(nhi_.size() + d_, -never);
        std::vector<double> cmin(d_, never), cmax(d_, -never);
        for (std::uint32_t p = b; p < e; ++p) {
            const std::size_t i = idx_[p];
            for (std::size_t k = 0; k < d_; ++k) {
                const double l = lo_[i * d_ + k], h = hi_[i * d_ + k], c = 0.5 * (l + h);
                nlo_[id * d_ + k] = std::min(nlo_[id * d_ + k], l);
                nhi_[id * d_ + k] = std::max(nhi_[id * d_ + k], h);
                cmin[k] = std::min(cmin[k], c);
                cmax[k] = std::max(cmax[k], c);
            }
        }
        if (e - b <= 8) return id;
        std::size_t axis = 0;
        for (std::size_t k = 1; k < d_; ++k)
            if (cmax[k] - cmin[k] > cmax[axis] - cmin[axis]) axis = k;
        if (!(cmax[axis] > cmin[axis])) return id;
        const std::uint32_t mid = b + (e - b) / 2;
        auto centre = [&](std::uint32_t i) { return lo_[i * d_ + axis] + hi_[i * d_ + axis]; };
        std::nth_element(idx_.begin() + b, idx_.begin() + mid, idx_.begin() + e,
                         [&](std::uint32_t x, std::uint32_t y) { return centre(x) < centre(y); });
        const int l = build(b, mid);
        const int r = build(mid, e);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    std::size_t d_;
    const std::vector<double>& lo_;
    const std::vector<double>& hi_;
    std::vector<std::uint32_t> idx_;
    std::vector<Node> nodes_;
    std::vector<double> nlo_, nhi_;
};

double box_gap2(const double* alo, const double* ahi, const double* blo, const double* bhi, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double gap = std::max({0.0, blo[k] - ahi[k], alo[k] - bhi[k]});
        s += gap * gap;
    }
    return s;
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace

// --- count engine ------------------------------------------------------------

CountEngine::CountEngine(const SemiflowSystem& sys, PointSet sample, std::vector<double> schedule,
                         double sample_resolution, std::shared_ptr<const PairMetric> metric)
    : sys_(sys),
      sample_(std::move(sample)),
      schedule_(std::move(schedule)),
      resolution_(sample_resolution),
      metric_(std::move(metric)) {
    if (schedule_.empty()) throw domain_error("empty T schedule");
    if (schedule_.size() > 64) throw domain_error("T schedule longer than 64 entries");
    for (std::size_t i = 0; i < schedule_.size(); ++i) {
        if (!(schedule_[i] >= 0)) throw domain_error("T schedule must be nonnegative");
        if (i > 0 && !(schedule_[i] > schedule_[i - 1])) throw domain_error("T schedule must be increasing");
    }
    if (sample_.size() >= (1u << 31)) throw domain_error("sample too large");
    for (const Point& p : sample_) sys_.space().check(p);
}

double CountEngine::bowen_step(double delta) const {
    return delta > 0 ? make_grid(delta, sys_.base().time_step_hint()).h_out() : sys_.base().time_step_hint();
}

const std::vector<Trajectory>& CountEngine::trajectories(double pad) {
    const double horizon = schedule_.back() + pad;
    if (traj_horizon_ >= horizon) return traj_;
    std::vector<Trajectory> fresh(sample_.size());
    parallel_for(sample_.size(), [&](std::size_t i) { fresh[i] = Trajectory(sys_, sample_[i], horizon); });
    traj_ = std::move(fresh);
    traj_horizon_ = horizon;
    return traj_;
}

const PairTable& CountEngine::table(BallKind kind, double eps, double delta, double rho) {
    if (!(eps > 0)) throw domain_error("eps must be positive");
    if (kind != BallKind::bowen && !(delta > 0)) throw domain_error("modified and tau balls need delta > 0");
    if (kind == BallKind::tau && !(rho > 0)) throw domain_error("tau balls need rho > 0");
    TableKey key{kind, eps, delta, kind == BallKind::tau ? rho : 0.0, 0.0};
    if (kind == BallKind::bowen) key.step = bowen_step(delta);
    auto it = tables_.find(key);
    if (it != tables_.end()) return it->second;
    return tables_.emplace(key, build(key)).first->second;
}

namespace {

TimeGrid grid_for(const TableKey& key, const SemiflowSystem& sys) {
    const double hint = sys.base().time_step_hint();
    switch (key.kind) {
        case BallKind::bowen: return key.delta > 0 ? make_grid(key.delta, hint) : point_grid(hint);
        case BallKind::tau: return tau_grid(sys, {0.0, key.eps, key.delta, key.rho});
        case BallKind::modified: break;
    }
    return make_grid(key.delta, hint);
}

}  // namespace

std::vector<std::pair<std::uint32_t, std::uint32_t>> CountEngine::candidates(const TableKey& key,
                                                                             const TimeGrid& g) {
    const auto& traj = trajectories(key.kind == BallKind::tau ? std::max(key.delta, key.rho)
                                    : key.kind == BallKind::bowen ? 0.0
                                                                  : key.delta);
    const MetricSpace& space = sys_.space();
    const std::size_t n = sample_.size();
    const std::size_t E = space.embed_dim();
    const bool iso = sys_.base().isometric();
    const double t_min = schedule_.front();
    const double eps = key.eps;

    // Probe windows as inclusive fine-index ranges of the grid.
    std::vector<std::pair<long, long>> probes;
    std::vector<char> brute(n, 0);
    std::vector<char> unbounded;
    bool everything = false;
    bool use_events = false;  // window samples include the point's own impulses
    double pad = 0.0;
    if (key.kind == BallKind::tau) {
        const long s_star = first_index_at_or_after(g, 1, key.rho);
        if (g.fine(s_star) > t_min) everything = true;
        probes.push_back({s_star, s_star});
        for (std::size_t i = 0; i < n && !everything; ++i) {
            const auto& ev = traj[i].events();
            if (!ev.empty() && ev.front() - key.rho <= g.fine(s_star)) brute[i] = 1;
        }
        // Later lattice times up to the first T separate expanding orbits far
        // better. A point with an impulse within rho of one of them gets an
        // unbounded box there.
        long last = first_index_at_or_after(g, 1, t_min);
        if (g.fine(last) > t_min) --last;
        if (!everything && !iso)
            for (long k = 1; k < 16 && last > s_star; ++k) {
                const long m = s_star + ((last - s_star) * k) / 15;
                if (m != probes.back().first) probes.push_back({m, m});
            }
        unbounded.assign(n * probes.size(), 0);
        for (std::size_t i = 0; i < n && !everything; ++i)
            for (std::size_t p = 1; p < probes.size(); ++p) {
                const double s = g.fine(probes[p].first);
                for (double c : traj[i].events())
                    if (c - key.rho <= s && s <= c + key.rho) unbounded[i * probes.size() + p] = 1;
            }
    } else {
        const long q = g.q;
        const long last = static_cast<long>(std::floor(t_min / g.h_out() + 1e-9));
        const long count = iso ? 1 : std::min<long>(16, last + 1);
        for (long k = 0; k < count; ++k) {
            const long c = count == 1 ? 0 : (k * last) / (count - 1);
            const long m = c * q;
            const long m_end = key.kind == BallKind::bowen ? m : m + g.n_in - 1;
            probes.push_back({m, m_end});
        }
        if (key.kind == BallKind::modified) {
            if (iso) {
                // Quiet points (no impulse inside the first window) keep a frozen
                // distance to each other there, so their time-0 positions decide.
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& ev = traj[i].events();
                    if (!ev.empty() && ev.front() < g.delta) brute[i] = 1;
                }
                probes.back().second = probes.back().first;
            } else if (sys_.impulsive()) {
                use_events = true;
                pad = sys_.base().speed_bound() * g.h_in;
            }
        }
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    if (everything) {
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) out.push_back({i, j});
        return out;
    }

    const std::size_t P = probes.size();
    const std::size_t D = P * E;
    std::vector<double> lo(n * D), hi(n * D);
    parallel_for(n, [&](std::size_t i) {
        double e[max_embed];
        for (std::size_t p = 0; p < P; ++p) {
            double* l = &lo[i * D + p * E];
            double* h = &hi[i * D + p * E];
            std::fill(l, l + E, never);
            std::fill(h, h + E, -never);
            auto add = [&](double t) {
                space.embed(traj[i].at(t), e);
                for (std::size_t k = 0; k < E; ++k) {
                    l[k] = std::min(l[k], e[k]);
                    h[k] = std::max(h[k], e[k]);
                }
            };
            for (long m = probes[p].first; m <= probes[p].second; ++m) add(g.fine(m));
            if (use_events) {
                const double a = g.fine(probes[p].first), b = a + g.delta;
                for (double t : traj[i].events())
                    if (t >= a && t < b) add(t);
            }
            for (std::size_t k = 0; k < E; ++k) {
                l[k] -= pad;
                h[k] += pad;
            }
            if (!unbounded.empty() && unbounded[i * P + p]) {
                std::fill(l, l + E, -never);
                std::fill(h, h + E, never);
            }
        }
    });

    std::vector<std::uint32_t> members;
    for (std::uint32_t i = 0; i < n; ++i)
        if (!brute[i]) members.push_back(i);
    // The tree indexes the latest probe, usually the most selective one; the
    // others are checked per reported pair. Tau boxes are bounded only at the
    // first probe.
    const std::size_t tp = key.kind == BallKind::tau ? 0 : P - 1;
    std::vector<double> tlo(n * E), thi(n * E);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(&lo[i * D + tp * E], E, &tlo[i * E]);
        std::copy_n(&hi[i * D + tp * E], E, &thi[i * E]);
    }
    BoxTree tree(E, tlo, thi, members);
    const double lim2 = (eps + 1e-12) * (eps + 1e-12);
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> found(n);
    parallel_for(n, [&](std::size_t i) {
        if (brute[i]) {
            for (std::uint32_t j = 0; j < n; ++j)
                if (j != i && (!brute[j] || j > i))
                    found[i].push_back({std::min<std::uint32_t>(i, j), std::max<std::uint32_t>(i, j)});
            return;
        }
        tree.query(&tlo[i * E], &thi[i * E], eps, [&](std::uint32_t j) {
            if (j <= i) return;
            for (std::size_t p = P; p-- > 0;)
                if (box_gap2(&lo[i * D + p * E], &hi[i * D + p * E], &lo[j * D + p * E], &hi[j * D + p * E], E) >=
                    lim2)
                    return;
            found[i].push_back({static_cast<std::uint32_t>(i), j});
        });
    });
    for (auto& f : found) out.insert(out.end(), f.begin(), f.end());

    // Pairs that can only be close through the metric's shortcuts.
    if (metric_ && !metric_->anchors().empty()) {
        std::vector<std::uint32_t> near;
        double e[max_embed], a[max_embed];
        for (std::uint32_t i = 0; i < n; ++i) {
            bool hit = false;
            for (const Point& k : metric_->anchors()) {
                space.embed(k, a);
                for (long m = probes[0].first; m <= probes[0].second && !hit; ++m) {
                    space.embed(traj[i].at(g.fine(m)), e);
                    double s = 0.0;
                    for (std::size_t c = 0; c < E; ++c) s += (e[c] - a[c]) * (e[c] - a[c]);
                    hit = std::sqrt(s) - pad < eps + 1e-12;
                }
            }
            if (hit) near.push_back(i);
        }
        for (std::size_t x = 0; x < near.size(); ++x)
            for (std::size_t y = x + 1; y < near.size(); ++y) out.push_back({near[x], near[y]});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

PairTable CountEngine::build(const TableKey& key) {
    const TimeGrid g = grid_for(key, sys_);
    const double pad = key.kind == BallKind::tau ? std::max(key.delta, key.rho)
                       : key.kind == BallKind::bowen ? 0.0
                                                     : key.delta;
    const auto& traj = trajectories(pad);
    const auto cand = candidates(key, g);
    const std::size_t K = schedule_.size();
    const double t_max = schedule_.back();

    std::vector<std::vector<double>> centers;
    if (key.kind == BallKind::tau) {
        centers.resize(sample_.size());
        for (std::size_t i = 0; i < sample_.size(); ++i) {
            centers[i].push_back(0.0);
            centers[i].insert(centers[i].end(), traj[i].events().begin(), traj[i].events().end());
            check_gaps(centers[i], key.rho);
        }
    }

    const bool cached = !metric_ && !sys_.base().isometric();
    if (cached) fill_orbit_cache(g, t_max + pad);
    const std::size_t E = sys_.space().embed_dim();

    std::vector<std::uint64_t> m_ij(cand.size(), 0), m_ji(cand.size(), 0);
    const PairMetric* metric = metric_.get();
    parallel_for(cand.size(), [&](std::size_t c) {
        const auto [i, j] = cand[c];
        PairScanner sc(sys_, traj[i], traj[j], metric);
        if (cached)
            sc.attach(&orbit_cache_[i * orbit_count_ * E], &orbit_cache_[j * orbit_count_ * E], orbit_count_,
                      orbit_stride_, orbit_band_);
        std::uint64_t a = 0, b = 0;
        switch (key.kind) {
            case BallKind::bowen: {
                const double e = sc.bowen_exit(g, key.eps, t_max);
                for (std::size_t k = 0; k < K && e > schedule_[k]; ++k)
                    if (sc.dist(schedule_[k]) < key.eps) a |= 1ULL << k;
                b = a;
                break;
            }
            case BallKind::modified: {
                const double e = sc.modified_exit(g, key.eps, t_max);
                for (std::size_t k = 0; k < K && e > schedule_[k]; ++k)
                    if (sc.window_passes(g, schedule_[k], key.eps)) a |= 1ULL << k;
                b = a;
                break;
            }
            case BallKind::tau: {
                const double ei = sc.tau_exit(g, centers[i], key.rho, key.eps, t_max);
                double ej = ei;
                if (centers[j] != centers[i]) {
                    PairScanner rs(sys_, traj[j], traj[i], metric);
                    if (cached)
                        rs.attach(&orbit_cache_[j * orbit_count_ * E], &orbit_cache_[i * orbit_count_ * E],
                                  orbit_count_, orbit_stride_, orbit_band_);
                    ej = rs.tau_exit(g, centers[j], key.rho, key.eps, t_max);
                }
                for (std::size_t k = 0; k < K; ++k) {
                    const double T = schedule_[k];
                    const bool close = sc.dist(T) < key.eps;
                    if (ei > T && (close || !in_j(centers[i], key.rho, T))) a |= 1ULL << k;
                    if (ej > T && (close || !in_j(centers[j], key.rho, T))) b |= 1ULL << k;
                }
                break;
            }
        }
        m_ij[c] = a;
        m_ji[c] = b;
    });

    PairTable t;
    t.key = key;
    t.candidates = cand.size();
    const std::size_t n = sample_.size();
    std::vector<std::uint32_t> deg(n + 1, 0);
    for (std::size_t c = 0; c < cand.size(); ++c)
        if (m_ij[c] | m_ji[c]) {
            ++deg[cand[c].first];
            ++deg[cand[c].second];
        }
    t.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) t.offsets[i + 1] = t.offsets[i] + deg[i];
    const std::size_t total = t.offsets[n];
    t.nbr.resize(total);
    t.j_in_i.resize(total);
    t.i_in_j.resize(total);
    std::vector<std::uint32_t> fill(t.offsets.begin(), t.offsets.end() - 1);
    // Candidates are sorted, so each adjacency list comes out sorted as well.
    for (std::size_t c = 0; c < cand.size(); ++c) {
        if (!(m_ij[c] | m_ji[c])) continue;
        const auto [i, j] = cand[c];
        const std::uint32_t pi = fill[i]++;
        t.nbr[pi] = j;
        t.j_in_i[pi] = m_ij[c];
        t.i_in_j[pi] = m_ji[c];
        const std::uint32_t pj = fill[j]++;
        t.nbr[pj] = i;
        t.j_in_i[pj] = m_ji[c];
        t.i_in_j[pj] = m_ij[c];
    }
    return t;
}

void CountEngine::fill_orbit_cache(const TimeGrid& g, double horizon) {
    const std::size_t E = sys_.space().embed_dim();
    const long fine_count = static_cast<long>(std::floor(horizon / g.h_in + 1e-9)) + 1;
    // Whole fine lattice when it fits, else the outer lattice only.
    const long stride = sample_.size() * fine_count * E * sizeof(float) <= orbit_cache_budget ? 1L : long{g.q};
    const long count = (fine_count - 1) / stride + 1;
    if (orbit_h_ == g.h_in && orbit_stride_ == stride && orbit_count_ >= count) return;
    const auto& traj = trajectories(horizon - schedule_.back());
    std::vector<float>().swap(orbit_cache_);
    orbit_cache_.resize(sample_.size() * count * E);
    std::vector<double> scale(sample_.size(), 0.0);
    parallel_for(sample_.size(), [&](std::size_t i) {
        std::vector<double> e(E);
        for (long k = 0; k < count; ++k) {
            sys_.space().embed(traj[i].at(g.fine(k * stride)), e.data());
            for (std::size_t c = 0; c < E; ++c) {
                orbit_cache_[(i * count + k) * E + c] = static_cast<float>(e[c]);
                scale[i] = std::max(scale[i], std::abs(e[c]));
            }
        }
    });
    // Rounding moves each coordinate by at most 2^-24 of the largest one.
    const double top = scale.empty() ? 0.0 : *std::max_element(scale.begin(), scale.end());
    orbit_band_ = 1e-6 * std::max(1.0, top) * std::sqrt(static_cast<double>(E));
    orbit_count_ = count;
    orbit_h_ = g.h_in;
    orbit_stride_ = stride;
}

std::vector<std::size_t> CountEngine::separated(BallKind kind, double eps, double delta, double rho, std::size_t k,
                                                const std::vector<std::size_t>& seeds) {
    const PairTable& t = table(kind, eps, delta, rho);
    if (k >= schedule_.size()) throw std::out_of_range("schedule index");
    const std::uint64_t bit = 1ULL << k;
    const std::size_t n = sample_.size();
    std::vector<char> member(n, 0), seen(n, 0);
    std::vector<std::size_t> out;
    auto offer = [&](std::size_t y) {
        if (seen[y]) return;
        seen[y] = 1;
        for (std::uint32_t p = t.offsets[y]; p < t.offsets[y + 1]; ++p)
            if (member[t.nbr[p]] && ((t.j_in_i[p] | t.i_in_j[p]) & bit)) return;
        member[y] = 1;
        out.push_back(y);
    };
    for (std::size_t s : seeds) {
        if (s >= n) throw std::out_of_range("seed index");
        offer(s);
    }
    for (std::size_t y = 0; y < n; ++y) offer(y);
    return out;
}

std::vector<std::size_t> CountEngine::improve_separated(BallKind kind, double eps, double delta, double rho,
                                                        std::size_t k, std::vector<std::size_t> set) {
    const PairTable& t = table(kind, eps, delta, rho);
    if (k >= schedule_.size()) throw std::out_of_range("schedule index");
    const std::uint64_t bit = 1ULL << k;
    const std::size_t n = sample_.size();
    auto conflict = [&](std::uint32_t p) { return ((t.j_in_i[p] | t.i_in_j[p]) & bit) != 0; };
    auto adjacent = [&](std::size_t a, std::size_t b) {
        const auto first = t.nbr.begin() + t.offsets[a], last = t.nbr.begin() + t.offsets[a + 1];
        const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(b));
        return it != last && *it == b && conflict(static_cast<std::uint32_t>(it - t.nbr.begin()));
    };
    std::vector<char> member(n, 0);
    std::vector<std::uint32_t> tight(n, 0);  // members in conflict with a non-member
    for (std::size_t m : set) {
        if (member[m]) throw std::invalid_argument("duplicate member");
        member[m] = 1;
    }
    for (std::size_t m : set)
        for (std::uint32_t p = t.offsets[m]; p < t.offsets[m + 1]; ++p)
            if (conflict(p)) {
                if (member[t.nbr[p]]) throw std::invalid_argument("set is not separated");
                ++tight[t.nbr[p]];
            }
    auto insert = [&](std::size_t v) {
        member[v] = 1;
        for (std::uint32_t p = t.offsets[v]; p < t.offsets[v + 1]; ++p)
            if (conflict(p)) ++tight[t.nbr[p]];
    };
    auto erase = [&](std::size_t v) {
        member[v] = 0;
        for (std::uint32_t p = t.offsets[v]; p < t.offsets[v + 1]; ++p)
            if (conflict(p)) --tight[t.nbr[p]];
    };
    // (1, 2)-swaps: a member whose removal frees two mutually separated
    // points is replaced by both; freed leftovers are admitted too.
    for (bool again = true; again;) {
        again = false;
        for (std::size_t x = 0; x < n; ++x) {
            if (!member[x]) continue;
            std::vector<std::size_t> solo;
            for (std::uint32_t p = t.offsets[x]; p < t.offsets[x + 1]; ++p)
                if (conflict(p) && !member[t.nbr[p]] && tight[t.nbr[p]] == 1) solo.push_back(t.nbr[p]);
            bool swapped = false;
            for (std::size_t a = 0; a < solo.size() && !swapped; ++a)
                for (std::size_t b = a + 1; b < solo.size() && !swapped; ++b)
                    if (!adjacent(solo[a], solo[b])) {
                        erase(x);
                        insert(solo[a]);
                        insert(solo[b]);
                        for (std::size_t v : solo)
                            if (!member[v] && tight[v] == 0) insert(v);
                        swapped = again = true;
                    }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < n; ++v)
        if (member[v]) out.push_back(v);
    return out;
}

std::size_t CountEngine::uncovered(BallKind kind, double eps, double delta, double rho, std::size_t k,
                                   const std::vector<std::size_t>& members) {
    const PairTable& t = table(kind, eps, delta, rho);
    const std::uint64_t bit = 1ULL << k;
    const std::size_t n = sample_.size();
    std::vector<char> member(n, 0);
    for (std::size_t m : members) member[m] = 1;
    std::size_t missing = 0;
    for (std::size_t y = 0; y < n; ++y) {
        if (member[y]) continue;
        bool covered = false;
        for (std::uint32_t p = t.offsets[y]; p < t.offsets[y + 1] && !covered; ++p)
            covered = member[t.nbr[p]] && (t.i_in_j[p] & bit);
        if (!covered) ++missing;
    }
    return missing;
}

std::vector<std::size_t> CountEngine::spanning(BallKind kind, double eps, double delta, double rho, std::size_t k,
                                               std::size_t* largest_ball) {
    const PairTable& t = table(kind, eps, delta, rho);
    if (k >= schedule_.size()) throw std::out_of_range("schedule index");
    const std::uint64_t bit = 1ULL << k;
    const std::size_t n = sample_.size();
    std::vector<char> covered(n, 0);
    auto gain = [&](std::size_t c) {
        std::size_t g = covered[c] ? 0 : 1;
        for (std::uint32_t p = t.offsets[c]; p < t.offsets[c + 1]; ++p)
            if ((t.j_in_i[p] & bit) && !covered[t.nbr[p]]) ++g;
        return g;
    };
    // Lazy greedy: stored gains only overestimate, so a refreshed top entry
    // that keeps its gain is exactly the naive choice (largest gain, lowest index).
    using Entry = std::pair<std::size_t, std::size_t>;  // gain, index
    auto worse = [](const Entry& a, const Entry& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
    std::size_t largest = 0;
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t g = gain(c);
        largest = std::max(largest, g);
        heap.push({g, c});
    }
    if (largest_ball) *largest_ball = largest;
    std::vector<std::size_t> out;
    std::size_t left = n;
    while (left > 0 && !heap.empty()) {
        auto [g, c] = heap.top();
        heap.pop();
        const std::size_t fresh = gain(c);
        if (fresh != g) {
            if (fresh > 0) heap.push({fresh, c});
            continue;
        }
        out.push_back(c);
        if (!covered[c]) {
            covered[c] = 1;
            --left;
        }
        for (std::uint32_t p = t.offsets[c]; p < t.offsets[c + 1]; ++p)
            if ((t.j_in_i[p] & bit) && !covered[t.nbr[p]]) {
                covered[t.nbr[p]] = 1;
                --left;
            }
    }
    return out;
}

namespace {

double harmonic(std::size_t m) {
    double h = 0.0;
    for (std::size_t i = 1; i <= m; ++i) h += 1.0 / static_cast<double>(i);
    return h;
}

}  // namespace

CountTable CountEngine::counts(CountKind kind, double eps, double delta, double rho, bool seeded) {
    CountTable out;
    out.kind = kind;
    out.schedule = schedule_;
    out.eps = eps;
    out.delta = delta;
    out.rho = kind == CountKind::tau_separated ? rho : 0.0;
    out.sample_resolution = resolution_;
    out.sample_size = sample_.size();
    const BallKind ball = ball_of(kind);
    for (std::size_t k = 0; k < schedule_.size(); ++k) {
        if (is_spanning(kind)) {
            std::size_t largest = 0;
            const auto f = spanning(ball, eps, delta, rho, k, &largest);
            out.counts.push_back(f.size());
            // Greedy is within H(largest) of optimal, and no cover beats n / largest.
            const std::size_t m = std::max<std::size_t>(1, largest);
            out.lower_bounds.push_back(std::max(static_cast<double>(f.size()) / harmonic(m),
                                                std::ceil(static_cast<double>(sample_.size()) / m)));
        } else {
            std::vector<std::size_t> seeds;
            if (seeded && ball != BallKind::modified) seeds = separated(BallKind::modified, eps, delta, 0.0, k);
            auto e = separated(ball, eps, delta, rho, k, seeds);
            if (seeded && ball == BallKind::tau) {
                // Seeds that are modified-separated but tau-close get dropped.
                // Both greedy orders are polished by swaps; the larger set stands.
                e = improve_separated(ball, eps, delta, rho, k, std::move(e));
                auto plain = improve_separated(ball, eps, delta, rho, k, separated(ball, eps, delta, rho, k));
                if (plain.size() > e.size()) e = std::move(plain);
            }
            out.counts.push_back(e.size());
        }
    }
    return out;
}

CountTable count_table(const SemiflowSystem& sys, const PointSet& sample, const std::vector<double>& schedule,
                       double eps, double delta, double rho, CountKind kind, double sample_resolution) {
    CountEngine engine(sys, sample, schedule, sample_resolution);
    return engine.counts(kind, eps, delta, rho);
}

std::vector<std::size_t> greedy_max_separated(const SemiflowSystem& sys, const PointSet& sample,
                                              const BallParams& p, BallKind kind) {
    CountEngine engine(sys, sample, {p.T});
    return engine.separated(kind, p.eps, p.delta, p.rho, 0);
}

std::vector<std::size_t> greedy_min_spanning(const SemiflowSystem& sys, const PointSet& sample, const BallParams& p,
                                             BallKind kind) {
    CountEngine engine(sys, sample, {p.T});
    return engine.spanning(kind, p.eps, p.delta, p.rho, 0);
}

// --- rates -------------------------------------------------------------------

EntropyEstimate fit_log_series(const std::vector<double>& T, const std::vector<double>& y,
                               std::optional<std::pair<double, double>> window) {
    if (T.size() != y.size()) throw std::invalid_argument("fit: length mismatch");
    if (T.empty()) throw std::invalid_argument("fit: empty series");
    double lo, hi;
    if (window) {
        lo = window->first;
        hi = window->second;
    } else {
        lo = T[T.size() / 2];
        hi = T.back();
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < T.size(); ++i)
        if (T[i] >= lo - 1e-9 && T[i] <= hi + 1e-9) {
            xs.push_back(T[i]);
            ys.push_back(y[i]);
        }
    if (xs.size() < 3)
        throw std::invalid_argument("fit needs at least 3 schedule points in the window, got " +
                                    std::to_string(xs.size()));
    const double n = static_cast<double>(xs.size());
    const double y0 = ys.front();
    for (double& v : ys) v -= y0;
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0)) throw std::invalid_argument("fit needs distinct T values");
    EntropyEstimate e;
    e.rate = sxy / sxx;
    const double icept = my - e.rate * mx;
    for (std::size_t i = 0; i < xs.size(); ++i) e.residual = std::max(e.residual, std::abs(ys[i] - icept - e.rate * xs[i]));
    e.t_min = xs.front();
    e.t_max = xs.back();
    e.points = xs.size();
    e.unreliable = e.residual > 0.5;
    e.negative = e.rate < -fit_tolerance;
    return e;
}

namespace {

std::vector<double> logs(const std::vector<std::size_t>& counts) {
    std::vector<double> out;
    for (std::size_t c : counts) {
        if (c == 0) throw std::invalid_argument("fit: zero count");
        out.push_back(std::log(static_cast<double>(c)));
    }
    return out;
}

}  // namespace

EntropyEstimate fit_growth_rate(const CountTable& table, std::optional<std::pair<double, double>> window) {
    EntropyEstimate e = fit_log_series(table.schedule, logs(table.counts), window);
    e.eps = table.eps;
    e.delta = table.delta;
    return e;
}

EntropyEstimate fit_spanning_interval(const CountTable& table, std::optional<std::pair<double, double>> window) {
    if (table.lower_bounds.size() != table.counts.size())
        throw std::invalid_argument("spanning interval needs a spanning count table");
    EntropyEstimate up = fit_growth_rate(table, window);
    std::vector<double> lb;
    for (double v : table.lower_bounds) lb.push_back(std::log(v));
    EntropyEstimate low = fit_log_series(table.schedule, lb, window);
    up.rate = 0.5 * (up.rate + low.rate);
    up.residual = std::max(up.residual, low.residual);
    up.unreliable = up.residual > 0.5;
    up.negative = up.rate < -fit_tolerance;
    return up;
}

EntropyMatrix estimate_entropy(const SemiflowSystem& sys, const std::vector<double>& resolution_path,
                               const std::vector<double>& eps_path, const std::vector<double>& delta_path,
                               const std::vector<double>& schedule, CountKind kind, const EstimateOptions& opts) {
    auto decreasing = [](const std::vector<double>& v, const char* what) {
        if (v.empty()) throw std::invalid_argument(std::string(what) + " is empty");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0)) throw std::invalid_argument(std::string(what) + " must be positive");
            if (i > 0 && !(v[i] < v[i - 1])) throw std::invalid_argument(std::string(what) + " must be strictly decreasing");
        }
    };
    decreasing(eps_path, "eps_path");
    decreasing(delta_path, "delta_path");
    if (resolution_path.size() != 1 && resolution_path.size() != eps_path.size())
        throw std::invalid_argument("sample_resolution_path must have one entry or one per eps");

    Sampler sampler = opts.sampler;
    if (!sampler) sampler = [&sys](double r) { return sys.space().sample_grid(r); };

    EntropyMatrix out;
    out.kind = kind;
    out.eps_path = eps_path;
    out.delta_path = delta_path;
    std::map<double, std::unique_ptr<CountEngine>> engines;
    for (std::size_t i = 0; i < eps_path.size(); ++i) {
        const double res = resolution_path.size() == 1 ? resolution_path[0] : resolution_path[i];
        auto& engine = engines[res];
        if (!engine) engine = std::make_unique<CountEngine>(sys, sampler(res), schedule, res, opts.metric);
        std::vector<EntropyEstimate> row;
        for (double delta : delta_path) {
            CountTable t = engine->counts(kind, eps_path[i], delta, opts.rho);
            row.push_back(is_spanning(kind) ? fit_spanning_interval(t, opts.window) : fit_growth_rate(t, opts.window));
            out.tables.push_back(std::move(t));
        }
        out.cells.push_back(std::move(row));
    }
    out.headline = out.cells.back().back();
    for (std::size_t i = 0; i < eps_path.size(); ++i)
        for (std::size_t j = 0; j < delta_path.size(); ++j) {
            const double r = out.cells[i][j].reported_rate();
            if (i > 0 && r < out.cells[i - 1][j].reported_rate() - opts.monotone_slack) {
                out.monotone_eps = false;
                out.diagnostics.push_back("rate drops as eps decreases to " + format_real(eps_path[i]) +
                                          " at delta " + format_real(delta_path[j]));
            }
            if (j > 0 && r < out.cells[i][j - 1].reported_rate() - opts.monotone_slack) {
                out.monotone_delta = false;
                out.diagnostics.push_back("rate drops as delta decreases to " + format_real(delta_path[j]) +
                                          " at eps " + format_real(eps_path[i]));
            }
            if (out.cells[i][j].unreliable)
                out.diagnostics.push_back("large fit residual at eps " + format_real(eps_path[i]) + ", delta " +
                                          format_real(delta_path[j]));
        }
    return out;
}

// --- output ------------------------------------------------------------------

std::string format_real(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_count_tables_csv(std::ostream& os, const std::vector<CountTable>& tables) {
    os << "kind,T,eps,delta,rho,sample_resolution,count\n";
    for (const CountTable& t : tables)
        for (std::size_t k = 0; k < t.counts.size(); ++k)
            os << to_string(t.kind) << ',' << format_real(t.schedule[k]) << ',' << format_real(t.eps) << ','
               << format_real(t.delta) << ',' << format_real(t.rho) << ',' << format_real(t.sample_resolution) << ','
               << t.counts[k] << '\n';
}

void write_estimates_csv(std::ostream& os, const std::vector<EntropyEstimate>& estimates) {
    os << "eps,delta,rate,residual,T_min,T_max\n";
    for (const EntropyEstimate& e : estimates)
        os << format_real(e.eps) << ',' << format_real(e.delta) << ',' << format_real(e.rate) << ','
           << format_real(e.residual) << ',' << format_real(e.t_min) << ',' << format_real(e.t_max) << '\n';
}

}  // namespace sfe
