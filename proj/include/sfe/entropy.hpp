#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sfe/metric_space.hpp"
#include "sfe/semiflow.hpp"

namespace sfe {

enum class BallKind { modified, bowen, tau };
enum class CountKind { separated, spanning, bowen_separated, bowen_spanning, tau_separated };

const char* to_string(CountKind k);
CountKind count_kind_from_string(const std::string& s);
BallKind ball_of(CountKind k);
bool is_spanning(CountKind k);

struct BallParams {
    double T = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    double rho = 0.0;  // 0 when absent
};

// Sampling lattice for windows and outer sweeps. The inner step divides delta
// exactly and the outer step is a whole number of inner steps, so every time
// used anywhere is an integer multiple of h_in (or an impulse time plus one).
struct TimeGrid {
    double delta = 0.0;
    int n_in = 32;
    double h_in = 0.0;
    int q = 1;  // outer step in inner steps

    double h_out() const { return q * h_in; }
    double fine(long m) const { return static_cast<double>(m) * h_in; }
};

TimeGrid make_grid(double delta, double hint);

// Distance used between orbit points; must never exceed the space distance.
class PairMetric {
public:
    virtual ~PairMetric() = default;
    virtual double distance(const Point& x, const Point& y) const = 0;
    // Points through which the metric shortcuts: a pair with space distance
    // >= eps and pair distance < eps has both members within eps of an anchor.
    virtual const PointSet& anchors() const = 0;
};

// --- single-pair predicates --------------------------------------------------

double ddelta(const SemiflowSystem& sys, const Point& x, const Point& y, double delta);
bool in_modified_ball(const SemiflowSystem& sys, const Point& center, const Point& y, const BallParams& p);
// Grid step defaults to the flow's time step hint.
bool in_bowen_ball(const SemiflowSystem& sys, const Point& center, const Point& y, double T, double eps,
                   double step = 0.0);
// Checks on the outer lattice of a window grid (plus impulse times), the
// lattice on which Bowen balls sit inside modified balls exactly.
bool in_bowen_ball(const SemiflowSystem& sys, const Point& center, const Point& y, double T, double eps,
                   const TimeGrid& g);
bool in_tau_ball(const SemiflowSystem& sys, const Point& center, const Point& y, const BallParams& p);

// Impulse times of x up to the horizon with tau_0 = 0 prepended.
std::vector<double> tau_times(const SemiflowSystem& sys, const Point& x, double horizon);

// Impulse times closer than 2 rho: the exclusion windows would overlap.
class admissibility_error : public domain_error {
public:
    using domain_error::domain_error;
};

struct Interval {
    double lo;
    double hi;
};

// J = (0, T] minus the open rho-windows around the given times, as closed
// intervals (the left end at 0 would be open but is always cut by tau_0).
std::vector<Interval> tau_exclusion_set(const std::vector<double>& times, double T, double rho);

// The tau-ball sits inside the modified ball whenever the center is admissible
// (first impulse at least gamma), gamma > 2 rho + h_in, delta > 2 rho + h_in and
// T itself is not excluded. Outside this domain the inclusion can fail.
bool tau_inclusion_applies(const SemiflowSystem& sys, const Point& center, const BallParams& p);

// --- pair scanner ------------------------------------------------------------

// Evaluates the distance between two orbits along the sampling lattice. For
// isometric base flows the space distance is constant between impulses, which
// lets scans jump over whole event-free segments on which the pair is close.
class PairScanner {
public:
    PairScanner(const SemiflowSystem& sys, const Trajectory& a, const Trajectory& b, const PairMetric* metric);

    double dist(double t) const;
    double space_dist(double t) const;

    // First Bowen check time (outer lattice or impulse time) <= t_max with d >= eps.
    double bowen_exit(const TimeGrid& g, double eps, double t_max) const;
    // First outer time (lattice or impulse) <= t_max whose window fails.
    double modified_exit(const TimeGrid& g, double eps, double t_max) const;
    // Some window sample at time t is closer than eps.
    bool window_passes(const TimeGrid& g, double t, double eps) const;
    // Window minimum over the same samples.
    double window_min(const TimeGrid& g, double t) const;
    // First tau-sample time in J(center = a) that fails, up to t_max.
    double tau_exit(const TimeGrid& g, const std::vector<double>& center_times, double rho, double eps,
                    double t_max) const;

    const std::vector<double>& events() const { return events_; }

    // Single-precision embeddings of both orbits at fine(k * stride), k < count.
    // Cached values within `band` of eps are recomputed exactly, so every
    // comparison against eps matches the uncached one.
    void attach(const float* a, const float* b, long count, long stride, double band);
    // Distance at fine(m), exact or else a value below the exact one by at
    // most 2 band and on the same side of eps.
    double lattice_dist(const TimeGrid& g, long m, double eps) const;

private:
    double seg_end(double t) const;
    double exclusion_radius(double v, double eps, double h) const;
    template <class F>
    bool smooth_window(const TimeGrid& g, long m, double eps, F&& value) const;
    bool constant_segments() const { return iso_; }

    const SemiflowSystem& sys_;
    const Trajectory& a_;
    const Trajectory& b_;
    const PairMetric* metric_;
    bool iso_;
    std::vector<double> events_;
    const float* cache_a_ = nullptr;
    const float* cache_b_ = nullptr;
    long cache_count_ = 0;
    long cache_stride_ = 1;
    double cache_band_ = 0.0;
};

// --- counting ----------------------------------------------------------------

struct TableKey {
    BallKind kind;
    double eps;
    double delta;
    double rho;
    double step;
    bool operator<(const TableKey& o) const {
        return std::tie(kind, eps, delta, rho, step) < std::tie(o.kind, o.eps, o.delta, o.rho, o.step);
    }
};

// Ball relations among sample points for every T of a schedule, as a sparse
// adjacency: entry (i -> j) carries bit k of `j_in_i` when j is in the ball of
// i at T_k and bit k of `i_in_j` when i is in the ball of j at T_k.
struct PairTable {
    TableKey key;
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> nbr;
    std::vector<std::uint64_t> j_in_i;
    std::vector<std::uint64_t> i_in_j;
    std::size_t candidates = 0;
};

struct CountTable {
    CountKind kind = CountKind::separated;
    std::vector<double> schedule;
    std::vector<std::size_t> counts;
    double eps = 0.0;
    double delta = 0.0;
    double rho = 0.0;
    double sample_resolution = 0.0;
    std::size_t sample_size = 0;
    // Spanning kinds: a lower bound on the optimal cover of the sample, the
    // larger of greedy size / H(largest ball) and sample size / largest ball.
    std::vector<double> lower_bounds;
};

class CountEngine {
public:
    CountEngine(const SemiflowSystem& sys, PointSet sample, std::vector<double> schedule,
                double sample_resolution = 0.0, std::shared_ptr<const PairMetric> metric = nullptr);

    const PointSet& sample() const { return sample_; }
    const std::vector<double>& schedule() const { return schedule_; }
    const SemiflowSystem& system() const { return sys_; }

    // Bowen tables use `step` (0 selects the outer step of the grid for delta,
    // or the flow's hint when delta is 0).
    const PairTable& table(BallKind kind, double eps, double delta = 0.0, double rho = 0.0);

    std::vector<std::size_t> separated(BallKind kind, double eps, double delta, double rho, std::size_t k,
                                       const std::vector<std::size_t>& seeds = {});
    std::vector<std::size_t> spanning(BallKind kind, double eps, double delta, double rho, std::size_t k,
                                      std::size_t* largest_ball = nullptr);
    // Local search on a separated set by (1, 2)-swaps until none applies. The
    // result is separated and at least as large; members come out sorted.
    std::vector<std::size_t> improve_separated(BallKind kind, double eps, double delta, double rho, std::size_t k,
                                               std::vector<std::size_t> set);
    // Sample points not in the ball of any member (excluding members).
    std::size_t uncovered(BallKind kind, double eps, double delta, double rho, std::size_t k,
                          const std::vector<std::size_t>& members);

    // With `seeded`, Bowen and tau separated sets start from the modified
    // separated set at the same (eps, delta). The tau count is the larger of
    // the seeded and plain greedy sets, each improved by swaps.
    CountTable counts(CountKind kind, double eps, double delta, double rho = 0.0, bool seeded = false);

private:
    double bowen_step(double delta) const;
    const std::vector<Trajectory>& trajectories(double pad);
    PairTable build(const TableKey& key);
    void fill_orbit_cache(const TimeGrid& g, double horizon);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates(const TableKey& key, const TimeGrid& g);

    const SemiflowSystem& sys_;
    PointSet sample_;
    std::vector<double> schedule_;
    double resolution_;
    std::shared_ptr<const PairMetric> metric_;
    std::vector<Trajectory> traj_;
    double traj_horizon_ = -1.0;
    std::map<TableKey, PairTable> tables_;
    std::vector<float> orbit_cache_;
    long orbit_count_ = 0;
    double orbit_h_ = 0.0;
    long orbit_stride_ = 0;
    double orbit_band_ = 0.0;
};

CountTable count_table(const SemiflowSystem& sys, const PointSet& sample, const std::vector<double>& schedule,
                       double eps, double delta, double rho, CountKind kind, double sample_resolution = 0.0);

std::vector<std::size_t> greedy_max_separated(const SemiflowSystem& sys, const PointSet& sample,
                                              const BallParams& p, BallKind kind);
std::vector<std::size_t> greedy_min_spanning(const SemiflowSystem& sys, const PointSet& sample, const BallParams& p,
                                             BallKind kind);

// --- rates -------------------------------------------------------------------

struct EntropyEstimate {
    double rate = 0.0;  // raw least-squares slope
    double residual = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    std::size_t points = 0;
    bool unreliable = false;  // residual above 0.5
    bool negative = false;    // slope below -fit_tolerance

    double reported_rate() const { return rate < 0 ? 0.0 : rate; }
};

inline constexpr double fit_tolerance = 1e-9;

EntropyEstimate fit_log_series(const std::vector<double>& T, const std::vector<double>& log_values,
                               std::optional<std::pair<double, double>> window = std::nullopt);
EntropyEstimate fit_growth_rate(const CountTable& table,
                                std::optional<std::pair<double, double>> window = std::nullopt);
// Midpoint of the slopes of the spanning count and of its lower bound.
EntropyEstimate fit_spanning_interval(const CountTable& table,
                                      std::optional<std::pair<double, double>> window = std::nullopt);

using Sampler = std::function<PointSet(double resolution)>;

struct EntropyMatrix {
    CountKind kind = CountKind::separated;
    std::vector<double> eps_path;
    std::vector<double> delta_path;
    std::vector<std::vector<EntropyEstimate>> cells;  // [eps][delta]
    std::vector<CountTable> tables;
    EntropyEstimate headline;
    bool monotone_eps = true;
    bool monotone_delta = true;
    std::vector<std::string> diagnostics;
};

struct EstimateOptions {
    Sampler sampler;  // defaults to the space's sample_grid
    std::shared_ptr<const PairMetric> metric;
    std::optional<std::pair<double, double>> window;
    double rho = 0.0;
    double monotone_slack = 0.05;
};

EntropyMatrix estimate_entropy(const SemiflowSystem& sys, const std::vector<double>& sample_resolution_path,
                               const std::vector<double>& eps_path, const std::vector<double>& delta_path,
                               const std::vector<double>& schedule, CountKind kind, const EstimateOptions& opts = {});

// --- output ------------------------------------------------------------------

std::string format_real(double v);
void write_count_tables_csv(std::ostream& os, const std::vector<CountTable>& tables);
void write_estimates_csv(std::ostream& os, const std::vector<EntropyEstimate>& estimates);

}  // namespace sfe
