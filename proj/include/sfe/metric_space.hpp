#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfe {

inline constexpr std::size_t max_coords = 3;
inline constexpr std::size_t max_embed = 6;

// Two points are the same point when their embeddings agree to this tolerance.
inline constexpr double coord_tol = 1e-9;

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double pi = 3.14159265358979323846264338327950;

using Embedded = std::array<double, max_embed>;

struct Point {
    std::array<double, max_coords> c{};
    std::uint8_t dim = 0;
    std::uint32_t tag = 0;

    double operator[](std::size_t i) const { return c[i]; }
    double& operator[](std::size_t i) { return c[i]; }
};

using PointSet = std::vector<Point>;

class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

std::uint32_t tag_of(const std::string& name);

// Wraps an angle into [0, 2pi).
double wrap_angle(double a);

double embedded_distance(const double* a, const double* b, std::size_t n);

// A compact metric space given by a coordinate chart and a Euclidean embedding.
// The distance between points is the Euclidean distance of their embeddings.
class MetricSpace {
public:
    explicit MetricSpace(std::string name) : name_(std::move(name)), tag_(tag_of(name_)) {}
    virtual ~MetricSpace() = default;

    const std::string& name() const { return name_; }
    std::uint32_t tag() const { return tag_; }

    virtual std::size_t dim() const = 0;
    virtual std::size_t embed_dim() const = 0;
    virtual void embed(const Point& x, double* out) const = 0;
    virtual bool contains(const Point& x) const = 0;

    // Brings raw coordinates into canonical form (angles wrapped etc).
    virtual Point normalize(Point x) const { return x; }

    // Every point of the space lies within `resolution` of the returned set.
    virtual PointSet sample_grid(double resolution) const = 0;

    // Constant C with |sample_grid(r)| <= C / r^dim for r <= 1.
    virtual double grid_constant() const = 0;

    virtual double diameter() const = 0;

    // Points at distance about `radius` from x along each coordinate direction.
    virtual PointSet neighbors(const Point& x, double radius) const;

    Point make(std::initializer_list<double> coords) const;
    Embedded embedding(const Point& x) const;
    double distance(const Point& x, const Point& y) const;
    bool same_point(const Point& x, const Point& y, double tol = coord_tol) const;
    void check(const Point& x) const;

private:
    std::string name_;
    std::uint32_t tag_;
};

class AnnulusSpace final : public MetricSpace {
public:
    AnnulusSpace(double r_inner = 1.0, double r_outer = 2.0);

    std::size_t dim() const override { return 2; }
    std::size_t embed_dim() const override { return 2; }
    void embed(const Point& x, double* out) const override;
    bool contains(const Point& x) const override;
    Point normalize(Point x) const override;
    PointSet sample_grid(double resolution) const override;
    double grid_constant() const override { return 16.0; }
    double diameter() const override { return 2.0 * r_outer_; }

    // Uniform sample of the circle of radius r with arc spacing at most `spacing`.
    PointSet ring_sample(double r, double spacing) const;

    double r_inner() const { return r_inner_; }
    double r_outer() const { return r_outer_; }

private:
    double r_inner_;
    double r_outer_;
};

class CircleSpace final : public MetricSpace {
public:
    explicit CircleSpace(double radius = 1.0);

    std::size_t dim() const override { return 1; }
    std::size_t embed_dim() const override { return 2; }
    void embed(const Point& x, double* out) const override;
    bool contains(const Point& x) const override;
    Point normalize(Point x) const override;
    PointSet sample_grid(double resolution) const override;
    double grid_constant() const override { return pi * radius_ + 1.0; }
    double diameter() const override { return 2.0 * radius_; }

    PointSet uniform_sample(std::size_t n) const;
    double radius() const { return radius_; }

private:
    double radius_;
};

// Mapping torus of the doubling map z -> z^2 on the unit circle, roof 1.
// Coordinates (x, s) in [0,1)^2; (x, 1) is glued to (2x mod 1, 0).
// Embedding F(x,s) = (mu e(s), lam((1-s)z + s z^2), lam sin(pi s) z) with
// z = e(x) = exp(2 pi i x); F is continuous across the roof and injective.
class SuspensionSpace final : public MetricSpace {
public:
    SuspensionSpace(double base_radius, double height_radius);

    std::size_t dim() const override { return 2; }
    std::size_t embed_dim() const override { return 6; }
    void embed(const Point& x, double* out) const override;
    bool contains(const Point& x) const override;
    Point normalize(Point x) const override;
    PointSet sample_grid(double resolution) const override;
    double grid_constant() const override;
    double diameter() const override;

    // n points on the height-0 section with an irrational offset.
    PointSet section_sample(std::size_t n) const;

    double base_radius() const { return lam_; }
    double height_radius() const { return mu_; }
    double lipschitz_x() const;
    double lipschitz_s() const;

private:
    double lam_;
    double mu_;
};

}  // namespace sfe
