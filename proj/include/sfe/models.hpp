#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sfe/metric_space.hpp"
#include "sfe/semiflow.hpp"

namespace sfe {

// --- flows -------------------------------------------------------------------

// Rigid rotation theta' = omega on the annulus or on a circle.
class RotationFlow final : public BaseSemiflow {
public:
    RotationFlow(std::size_t angle_index, double omega, double max_radius, double hint = 0.1);
    Point evolve(double t, const Point& x) const override;
    std::optional<Point> evolve_back(double t, const Point& x) const override;
    double time_step_hint() const override { return hint_; }
    double speed_bound() const override { return std::abs(omega_) * max_radius_; }
    bool isometric() const override { return true; }

private:
    std::size_t k_;
    double omega_;
    double max_radius_;
    double hint_;
};

// Unit-speed vertical flow on the doubling suspension.
class SuspensionFlow final : public BaseSemiflow {
public:
    SuspensionFlow(std::shared_ptr<const SuspensionSpace> space, double hint = 0.1);
    Point evolve(double t, const Point& x) const override;
    double time_step_hint() const override { return hint_; }
    double speed_bound() const override;

private:
    std::shared_ptr<const SuspensionSpace> space_;
    double hint_;
};

// --- impulse sets ------------------------------------------------------------

// Finite impulse set with a jump map given pointwise.
class FiniteImpulseSet final : public ImpulseSet {
public:
    FiniteImpulseSet(std::shared_ptr<const MetricSpace> space, PointSet points, std::function<Point(const Point&)> jump,
                     double min_gap = 0.0);
    double distance_to(const Point& x) const override;
    Point jump(const Point& x) const override { return jump_(x); }
    PointSet sample(double /*resolution*/) const override { return points_; }
    double min_impulse_gap() const override { return min_gap_; }

private:
    std::shared_ptr<const MetricSpace> space_;
    PointSet points_;
    std::function<Point(const Point&)> jump_;
    double min_gap_;
};

// Jump followed by a flow of the given duration: the fault-injection wrapper.
class ShiftedJump final : public ImpulseSet {
public:
    ShiftedJump(std::shared_ptr<const ImpulseSet> inner, std::shared_ptr<const BaseSemiflow> flow, double shift)
        : inner_(std::move(inner)), flow_(std::move(flow)), shift_(shift) {}
    double distance_to(const Point& x) const override { return inner_->distance_to(x); }
    Point jump(const Point& x) const override { return flow_->evolve(shift_, inner_->jump(x)); }
    PointSet sample(double resolution) const override { return inner_->sample(resolution); }
    double min_impulse_gap() const override { return inner_->min_impulse_gap(); }

private:
    std::shared_ptr<const ImpulseSet> inner_;
    std::shared_ptr<const BaseSemiflow> flow_;
    double shift_;
};

// --- models ------------------------------------------------------------------

struct AnnulusParams {
    double xi = 0.1;
    double eta = 0.5;
};

// X = {1 <= r <= 2}, rotation with unit angular speed, D = {(3/2, 0)}, I(D) = {(1, pi)}.
std::shared_ptr<const SemiflowSystem> make_annulus(const AnnulusParams& p = {});
// The same data with the identity as jump map (fails regularity clause (a)).
std::shared_ptr<const SemiflowSystem> make_annulus_identity_jump(const AnnulusParams& p = {});
Point annulus_closed_form(const Point& x, double t);

struct RotationParams {
    double radius = 1.0;
    double omega = 1.0;
};

std::shared_ptr<const SemiflowSystem> make_rotation(const RotationParams& p = {});

struct DoublingParams {
    // Radius of the base circle in the embedding; sets the scale at which
    // binary itineraries become visible at eps = 0.1.
    double base_radius = 0.06;
    double height_radius = 1.0 / two_pi;
    double hint = 0.1;
};

std::shared_ptr<const SemiflowSystem> make_doubling_suspension(const DoublingParams& p = {});

// Scale below which distinct itineraries are resolved by the suspension metric.
double doubling_epsilon0(const SemiflowSystem& sys);
// 2^floor(T); throws when eps exceeds epsilon0.
long long itinerary_separated_count(const SemiflowSystem& sys, double T, double eps);

// Same system with every jump followed by flowing for `shift` time units.
std::shared_ptr<const SemiflowSystem> with_shifted_jump(const SemiflowSystem& sys, double shift);

using ModelParams = std::map<std::string, double>;

std::vector<std::string> model_names();
// Throws std::invalid_argument for unknown names or parameters.
std::shared_ptr<const SemiflowSystem> make_model(const std::string& name, const ModelParams& params);

}  // namespace sfe
