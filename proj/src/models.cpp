#include "sfe/models.hpp"

#include <cmath>
#include <stdexcept>

namespace sfe {

RotationFlow::RotationFlow(std::size_t angle_index, double omega, double max_radius, double hint)
    : k_(angle_index), omega_(omega), max_radius_(max_radius), hint_(hint) {}

Point RotationFlow::evolve(double t, const Point& x) const {
    Point y = x;
    y.c[k_] = wrap_angle(x.c[k_] + omega_ * t);
    return y;
}

std::optional<Point> RotationFlow::evolve_back(double t, const Point& x) const {
    Point y = x;
    y.c[k_] = wrap_angle(x.c[k_] - omega_ * t);
    return y;
}

SuspensionFlow::SuspensionFlow(std::shared_ptr<const SuspensionSpace> space, double hint)
    : space_(std::move(space)), hint_(hint) {}

Point SuspensionFlow::evolve(double t, const Point& p) const {
    const double u = p.c[1] + t;
    const double k = std::floor(u);
    Point y = p;
    double x = std::ldexp(p.c[0], static_cast<int>(k));
    x -= std::floor(x);
    double s = u - k;
    if (s >= 1.0) s = 0.0;
    y.c[0] = x;
    y.c[1] = s;
    return y;
}

double SuspensionFlow::speed_bound() const { return space_->lipschitz_s(); }

FiniteImpulseSet::FiniteImpulseSet(std::shared_ptr<const MetricSpace> space, PointSet points,
                                   std::function<Point(const Point&)> jump, double min_gap)
    : space_(std::move(space)), points_(std::move(points)), jump_(std::move(jump)), min_gap_(min_gap) {}

double FiniteImpulseSet::distance_to(const Point& x) const {
    double best = never;
    for (const Point& p : points_) best = std::min(best, space_->distance(x, p));
    return best;
}

// --- annulus -----------------------------------------------------------------

namespace {

constexpr double ring_radius = 1.5;

std::shared_ptr<const SemiflowSystem> annulus_with_jump(const AnnulusParams& p, bool identity) {
    auto space = std::make_shared<AnnulusSpace>(1.0, 2.0);
    auto flow = std::make_shared<RotationFlow>(1, 1.0, 2.0);
    Point d = space->make({ring_radius, 0.0});
    Point target = space->make({1.0, pi});
    std::function<Point(const Point&)> jump;
    if (identity)
        jump = [](const Point& x) { return x; };
    else
        jump = [target](const Point&) { return target; };
    // Only the ring r = 3/2 meets D and a jumped orbit never returns to it, so
    // any gap bound holds vacuously; one revolution is the natural one.
    auto imp = std::make_shared<FiniteImpulseSet>(space, PointSet{d}, jump, two_pi);
    return std::make_shared<SemiflowSystem>(space, flow, imp, p.xi, p.eta);
}

}  // namespace

std::shared_ptr<const SemiflowSystem> make_annulus(const AnnulusParams& p) { return annulus_with_jump(p, false); }

std::shared_ptr<const SemiflowSystem> make_annulus_identity_jump(const AnnulusParams& p) {
    return annulus_with_jump(p, true);
}

Point annulus_closed_form(const Point& x, double t) {
    static const AnnulusSpace space;
    space.check(x);
    const double r = x.c[0], theta = x.c[1];
    const double fuzz = ImpulseOptions{}.fuzz;
    if (std::abs(r - ring_radius) > fuzz) return space.make({r, theta + t});
    const double hit = theta == 0.0 ? two_pi : two_pi - theta;
    if (t < hit) return space.make({r, theta + t});
    return space.make({1.0, pi + (t - hit)});
}

// --- rotation ----------------------------------------------------------------

std::shared_ptr<const SemiflowSystem> make_rotation(const RotationParams& p) {
    auto space = std::make_shared<CircleSpace>(p.radius);
    double hint = std::min(0.1, 0.1 / std::abs(p.omega));
    auto flow = std::make_shared<RotationFlow>(0, p.omega, p.radius, hint);
    return std::make_shared<SemiflowSystem>(space, flow);
}

// --- doubling suspension -----------------------------------------------------

std::shared_ptr<const SemiflowSystem> make_doubling_suspension(const DoublingParams& p) {
    auto space = std::make_shared<SuspensionSpace>(p.base_radius, p.height_radius);
    auto flow = std::make_shared<SuspensionFlow>(space, p.hint);
    return std::make_shared<SemiflowSystem>(space, flow);
}

double doubling_epsilon0(const SemiflowSystem& sys) {
    const auto* s = dynamic_cast<const SuspensionSpace*>(&sys.space());
    if (!s) throw domain_error("not a doubling suspension");
    return 2.0 * s->base_radius();
}

long long itinerary_separated_count(const SemiflowSystem& sys, double T, double eps) {
    const double e0 = doubling_epsilon0(sys);
    if (eps > e0) throw domain_error("itinerary oracle needs eps <= " + std::to_string(e0));
    if (T < 0) throw domain_error("itinerary oracle needs T >= 0");
    return 1LL << static_cast<int>(std::floor(T));
}

std::shared_ptr<const SemiflowSystem> with_shifted_jump(const SemiflowSystem& sys, double shift) {
    if (!sys.impulsive()) throw domain_error("system has no jump map to corrupt");
    auto imp = std::make_shared<ShiftedJump>(sys.impulse_ptr(), sys.base_ptr(), shift);
    return std::make_shared<SemiflowSystem>(sys.space_ptr(), sys.base_ptr(), imp, sys.xi(), sys.eta(),
                                            sys.options());
}

// --- registry ----------------------------------------------------------------

std::vector<std::string> model_names() { return {"annulus", "rotation", "doubling-suspension"}; }

namespace {

double take(const ModelParams& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void allow_only(const std::string& model, const ModelParams& p, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* a : keys) ok = ok || k == a;
        if (!ok) throw std::invalid_argument("model " + model + ": unknown parameter '" + k + "'");
    }
}

}  // namespace

std::shared_ptr<const SemiflowSystem> make_model(const std::string& name, const ModelParams& params) {
    if (name == "annulus") {
        allow_only(name, params, {"xi", "eta"});
        AnnulusParams a;
        a.xi = take(params, "xi", a.xi);
        a.eta = take(params, "eta", a.eta);
        return make_annulus(a);
    }
    if (name == "rotation") {
        allow_only(name, params, {"radius", "omega"});
        RotationParams r;
        r.radius = take(params, "radius", r.radius);
        r.omega = take(params, "omega", r.omega);
        return make_rotation(r);
    }
    if (name == "doubling-suspension") {
        allow_only(name, params, {"base_radius", "height_radius", "hint"});
        DoublingParams d;
        d.base_radius = take(params, "base_radius", d.base_radius);
        d.height_radius = take(params, "height_radius", d.height_radius);
        d.hint = take(params, "hint", d.hint);
        return make_doubling_suspension(d);
    }
    throw std::invalid_argument("unknown model '" + name + "'");
}

}  // namespace sfe
