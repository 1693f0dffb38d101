#pragma once

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "incsub/point.hpp"

namespace incsub {

class RandomStream;

struct Box {
    Vector lower;
    Vector upper;
};

struct Ball {
    Vector center;
    double radius;
};

/// {x : x >= 0, sum(x) = scale}
struct Simplex {
    std::size_t dim;
    double scale;
};

struct Halfspace {
    Vector normal;  // normal^T x <= offset
    double offset;
};

struct Halfspaces {
    std::vector<Halfspace> constraints;
    std::size_t max_iterations = 200000;
    double tolerance = 1e-10;
};

/// Closed convex set with an exact (or tolerance-controlled) Euclidean
/// projection. Immutable; construct through the named factories, which
/// reject empty or degenerate parameters.
class FeasibleSet {
public:
    using Variant = std::variant<Box, Ball, Simplex, Halfspaces>;

    static FeasibleSet box(Vector lower, Vector upper);
    static FeasibleSet box(std::size_t dim, double lower, double upper);
    static FeasibleSet ball(Vector center, double radius);
    static FeasibleSet simplex(std::size_t dim, double scale);
    static FeasibleSet halfspaces(std::vector<Halfspace> constraints);

    std::size_t dim() const { return dim_; }
    const Variant& variant() const { return shape_; }

    /// Euclidean projection. Throws DimensionMismatch, and
    /// ProjectionNotConverged for the iterative Halfspaces variant.
    DecisionPoint project(const DecisionPoint& x) const;
    Vector project(const Vector& x) const;

    bool contains(const Vector& x, double tol = 1e-9) const;

    /// max_{x,y in X} ||x - y||; +inf for Halfspaces.
    double diameter() const;
    bool bounded() const { return std::isfinite(diameter()); }

    /// A random point of the set (uniform for Box/Ball/Simplex; for
    /// Halfspaces, the projection of a uniform point of [-extent, extent]^n).
    Vector sample(RandomStream& rng, double extent = 10.0) const;

    /// Axis-aligned bounding box when bounded.
    Box bounding_box() const;

    const char* kind_name() const;

private:
    explicit FeasibleSet(Variant v, std::size_t dim) : shape_(std::move(v)), dim_(dim) {}

    Variant shape_;
    std::size_t dim_;
};

// Sort-and-threshold projection onto {x >= 0, sum x = scale}.
Vector project_onto_simplex(const Vector& x, double scale);

}  // namespace incsub
