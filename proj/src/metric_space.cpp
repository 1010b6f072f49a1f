#include "sfe/metric_space.hpp"

#include <algorithm>
#include <cmath>

namespace sfe {

std::uint32_t tag_of(const std::string& name) {
    // FNV-1a
    std::uint32_t h = 2166136261u;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 16777619u;
    }
    return h;
}

double wrap_angle(double a) {
    double w = std::fmod(a, two_pi);
    if (w < 0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    return w;
}

double embedded_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Point MetricSpace::make(std::initializer_list<double> coords) const {
    if (coords.size() != dim())
        throw domain_error(name() + ": expected " + std::to_string(dim()) + " coordinates");
    Point p;
    p.dim = static_cast<std::uint8_t>(dim());
    p.tag = tag();
    std::size_t i = 0;
    for (double v : coords) p.c[i++] = v;
    return normalize(p);
}

Embedded MetricSpace::embedding(const Point& x) const {
    Embedded e{};
    embed(x, e.data());
    return e;
}

void MetricSpace::check(const Point& x) const {
    if (x.tag != tag()) throw domain_error("point does not belong to space " + name());
}

double MetricSpace::distance(const Point& x, const Point& y) const {
    check(x);
    check(y);
    Embedded a{}, b{};
    embed(x, a.data());
    embed(y, b.data());
    return embedded_distance(a.data(), b.data(), embed_dim());
}

bool MetricSpace::same_point(const Point& x, const Point& y, double tol) const {
    return distance(x, y) <= tol;
}

PointSet MetricSpace::neighbors(const Point& x, double radius) const {
    PointSet out;
    for (std::size_t i = 0; i < dim(); ++i) {
        for (double sign : {1.0, -1.0}) {
            Point y = x;
            y.c[i] += sign * radius;
            y = normalize(y);
            double d = distance(x, y);
            if (d <= 0.0) continue;
            y = x;
            y.c[i] += sign * radius * radius / d;
            y = normalize(y);
            if (contains(y)) out.push_back(y);
        }
    }
    return out;
}

// --- annulus ---------------------------------------------------------------

AnnulusSpace::AnnulusSpace(double r_inner, double r_outer)
    : MetricSpace("annulus"), r_inner_(r_inner), r_outer_(r_outer) {
    if (!(r_inner > 0 && r_outer > r_inner)) throw domain_error("annulus: need 0 < r_inner < r_outer");
}

void AnnulusSpace::embed(const Point& x, double* out) const {
    out[0] = x.c[0] * std::cos(x.c[1]);
    out[1] = x.c[0] * std::sin(x.c[1]);
}

bool AnnulusSpace::contains(const Point& x) const {
    return x.tag == tag() && x.c[0] >= r_inner_ - coord_tol && x.c[0] <= r_outer_ + coord_tol &&
           x.c[1] >= 0.0 && x.c[1] < two_pi;
}

Point AnnulusSpace::normalize(Point x) const {
    x.c[1] = wrap_angle(x.c[1]);
    return x;
}

PointSet AnnulusSpace::sample_grid(double resolution) const {
    if (!(resolution > 0)) throw domain_error("sample_grid: resolution must be positive");
    // Radial step <= sqrt(2) res and angular half-gap (measured at the outer edge
    // of each ring's cell) <= res / sqrt(2) give covering radius <= res. An even
    // ring count puts the middle circle on the grid exactly.
    const double width = r_outer_ - r_inner_;
    auto n_r = static_cast<std::size_t>(std::ceil(width / (std::sqrt(2.0) * resolution)));
    if (n_r % 2) ++n_r;
    const double dr = width / static_cast<double>(n_r);
    PointSet out;
    for (std::size_t i = 0; i <= n_r; ++i) {
        double r = r_inner_ + width * (static_cast<double>(i) / static_cast<double>(n_r));
        double reach = r + dr / 2;
        auto n_t = static_cast<std::size_t>(std::ceil(pi * std::sqrt(2.0) * reach / resolution));
        n_t = std::max<std::size_t>(n_t, 3);
        for (std::size_t j = 0; j < n_t; ++j)
            out.push_back(make({r, two_pi * static_cast<double>(j) / static_cast<double>(n_t)}));
    }
    return out;
}

PointSet AnnulusSpace::ring_sample(double r, double spacing) const {
    if (!(spacing > 0)) throw domain_error("ring_sample: spacing must be positive");
    auto n = static_cast<std::size_t>(std::ceil(two_pi * r / spacing));
    PointSet out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        out.push_back(make({r, two_pi * static_cast<double>(j) / static_cast<double>(n)}));
    return out;
}

// --- circle ----------------------------------------------------------------

CircleSpace::CircleSpace(double radius) : MetricSpace("circle"), radius_(radius) {
    if (!(radius > 0)) throw domain_error("circle: radius must be positive");
}

void CircleSpace::embed(const Point& x, double* out) const {
    out[0] = radius_ * std::cos(x.c[0]);
    out[1] = radius_ * std::sin(x.c[0]);
}

bool CircleSpace::contains(const Point& x) const {
    return x.tag == tag() && x.c[0] >= 0.0 && x.c[0] < two_pi;
}

Point CircleSpace::normalize(Point x) const {
    x.c[0] = wrap_angle(x.c[0]);
    return x;
}

PointSet CircleSpace::sample_grid(double resolution) const {
    if (!(resolution > 0)) throw domain_error("sample_grid: resolution must be positive");
    auto n = static_cast<std::size_t>(std::ceil(pi * radius_ / resolution));
    return uniform_sample(std::max<std::size_t>(n, 3));
}

PointSet CircleSpace::uniform_sample(std::size_t n) const {
    PointSet out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) out.push_back(make({two_pi * static_cast<double>(j) / static_cast<double>(n)}));
    return out;
}

// --- doubling suspension ---------------------------------------------------

SuspensionSpace::SuspensionSpace(double base_radius, double height_radius)
    : MetricSpace("doubling-suspension"), lam_(base_radius), mu_(height_radius) {
    if (!(lam_ > 0 && mu_ > 0)) throw domain_error("suspension: radii must be positive");
}

void SuspensionSpace::embed(const Point& p, double* out) const {
    const double x = p.c[0], s = p.c[1];
    const double cz = std::cos(two_pi * x), sz = std::sin(two_pi * x);
    const double cz2 = cz * cz - sz * sz, sz2 = 2 * cz * sz;
    const double lift = std::sin(pi * s);
    out[0] = mu_ * std::cos(two_pi * s);
    out[1] = mu_ * std::sin(two_pi * s);
    out[2] = lam_ * ((1 - s) * cz + s * cz2);
    out[3] = lam_ * ((1 - s) * sz + s * sz2);
    out[4] = lam_ * lift * cz;
    out[5] = lam_ * lift * sz;
}

bool SuspensionSpace::contains(const Point& p) const {
    return p.tag == tag() && p.c[0] >= 0 && p.c[0] < 1 && p.c[1] >= 0 && p.c[1] < 1;
}

Point SuspensionSpace::normalize(Point p) const {
    // Heights above the roof are folded back through the gluing map.
    double s = p.c[1];
    double x = p.c[0];
    if (s >= 1) {
        double k = std::floor(s);
        x = std::ldexp(x, static_cast<int>(k));
        s -= k;
    }
    x -= std::floor(x);
    if (x >= 1) x = 0;
    p.c[0] = x;
    p.c[1] = s;
    return p;
}

double SuspensionSpace::lipschitz_x() const { return two_pi * lam_ * std::sqrt(5.0); }

double SuspensionSpace::lipschitz_s() const { return two_pi * mu_ + (2 + pi) * lam_; }

PointSet SuspensionSpace::sample_grid(double resolution) const {
    if (!(resolution > 0)) throw domain_error("sample_grid: resolution must be positive");
    auto n_x = static_cast<std::size_t>(std::ceil(lipschitz_x() / resolution));
    auto n_s = static_cast<std::size_t>(std::ceil(2 * lipschitz_s() / resolution));
    n_x = std::max<std::size_t>(n_x, 3);
    n_s = std::max<std::size_t>(n_s, 2);
    PointSet out;
    out.reserve(n_x * n_s);
    for (std::size_t k = 0; k < n_s; ++k)
        for (std::size_t j = 0; j < n_x; ++j)
            out.push_back(make({(static_cast<double>(j) + 0.5) / static_cast<double>(n_x),
                                static_cast<double>(k) / static_cast<double>(n_s)}));
    return out;
}

double SuspensionSpace::grid_constant() const { return (lipschitz_x() + 3) * (2 * lipschitz_s() + 2); }

double SuspensionSpace::diameter() const { return 2 * std::sqrt(mu_ * mu_ + 2 * lam_ * lam_); }

PointSet SuspensionSpace::section_sample(std::size_t n) const {
    const double offset = std::sqrt(2.0) - 1.0;
    PointSet out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        out.push_back(make({(static_cast<double>(j) + offset) / static_cast<double>(n), 0.0}));
    return out;
}

}  // namespace sfe
