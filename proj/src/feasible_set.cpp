#include "incsub/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "incsub/random.hpp"

namespace incsub {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vector project_box(const Box& b, const Vector& x) { return x.cwiseMax(b.lower).cwiseMin(b.upper); }

Vector project_ball(const Ball& b, const Vector& x) {
    const Vector d = x - b.center;
    const double r = d.norm();
    if (r <= b.radius) return x;
    return b.center + d * (b.radius / r);
}

// Dykstra's alternating projections onto an intersection of halfspaces.
Vector project_halfspaces(const Halfspaces& h, const Vector& x) {
    const auto& cs = h.constraints;
    auto violation = [&](const Vector& y) {
        double worst = 0.0;
        for (const auto& c : cs) worst = std::max(worst, c.normal.dot(y) - c.offset);
        return worst;
    };
    if (violation(x) <= 0.0) return x;

    std::vector<Vector> increments(cs.size(), Vector::Zero(x.size()));
    Vector y = x;
    for (std::size_t it = 0; it < h.max_iterations; ++it) {
        const Vector before = y;
        for (std::size_t j = 0; j < cs.size(); ++j) {
            const Vector shifted = y + increments[j];
            const double excess = cs[j].normal.dot(shifted) - cs[j].offset;
            Vector projected = shifted;
            if (excess > 0.0) projected -= cs[j].normal * (excess / cs[j].normal.squaredNorm());
            increments[j] = shifted - projected;
            y = projected;
        }
        if ((y - before).norm() <= h.tolerance && violation(y) <= h.tolerance) return y;
    }
    throw ProjectionNotConverged("halfspace projection did not reach tolerance " +
                                 std::to_string(h.tolerance) + " within " +
                                 std::to_string(h.max_iterations) + " sweeps");
}

}  // namespace

Vector project_onto_simplex(const Vector& x, double scale) {
    const auto n = x.size();
    std::vector<double> sorted(x.data(), x.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumulative += sorted[static_cast<std::size_t>(j)];
        const double candidate = (cumulative - scale) / static_cast<double>(j + 1);
        if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
    }
    return (x.array() - theta).cwiseMax(0.0).matrix();
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
    require_same_dim(lower, upper);
    if (lower.size() == 0) throw InvalidArgument("box: zero dimension");
    if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("box: bounds must be finite");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (lower[i] > upper[i])
            throw InvalidArgument("box: lower > upper at coordinate " + std::to_string(i));
    const auto n = static_cast<std::size_t>(lower.size());
    return FeasibleSet(Box{std::move(lower), std::move(upper)}, n);
}

FeasibleSet FeasibleSet::box(std::size_t dim, double lower, double upper) {
    const auto n = static_cast<Eigen::Index>(dim);
    return box(Vector::Constant(n, lower), Vector::Constant(n, upper));
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
    if (center.size() == 0) throw InvalidArgument("ball: zero dimension");
    if (!center.allFinite()) throw InvalidArgument("ball: center must be finite");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball: radius must be > 0");
    const auto n = static_cast<std::size_t>(center.size());
    return FeasibleSet(Ball{std::move(center), radius}, n);
}

FeasibleSet FeasibleSet::simplex(std::size_t dim, double scale) {
    if (dim == 0) throw InvalidArgument("simplex: zero dimension");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("simplex: scale must be > 0");
    return FeasibleSet(Simplex{dim, scale}, dim);
}

FeasibleSet FeasibleSet::halfspaces(std::vector<Halfspace> constraints) {
    if (constraints.empty()) throw InvalidArgument("halfspaces: no constraints");
    const auto n = constraints.front().normal.size();
    if (n == 0) throw InvalidArgument("halfspaces: zero dimension");
    for (const auto& c : constraints) {
        require_same_dim(constraints.front().normal, c.normal);
        if (!(c.normal.norm() > 0.0)) throw InvalidArgument("halfspaces: zero normal");
        if (!c.normal.allFinite() || !std::isfinite(c.offset))
            throw InvalidArgument("halfspaces: non-finite constraint");
    }
    Halfspaces h{std::move(constraints)};
    // Nonemptiness: the projection of the origin must exist.
    FeasibleSet set(h, static_cast<std::size_t>(n));
    try {
        (void)project_halfspaces(h, Vector::Zero(n));
    } catch (const ProjectionNotConverged&) {
        throw InvalidArgument("halfspaces: intersection appears empty (projection diverged)");
    }
    return set;
}

Vector FeasibleSet::project(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionMismatch(dim_, static_cast<std::size_t>(x.size()));
    return std::visit(overloaded{
                          [&](const Box& b) { return project_box(b, x); },
                          [&](const Ball& b) { return project_ball(b, x); },
                          [&](const Simplex& s) { return project_onto_simplex(x, s.scale); },
                          [&](const Halfspaces& h) { return project_halfspaces(h, x); },
                      },
                      shape_);
}

DecisionPoint FeasibleSet::project(const DecisionPoint& x) const { return DecisionPoint(project(x.coords())); }

bool FeasibleSet::contains(const Vector& x, double tol) const {
    if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionMismatch(dim_, static_cast<std::size_t>(x.size()));
    return std::visit(overloaded{
                          [&](const Box& b) {
                              return ((x - b.lower).array() >= -tol).all() &&
                                     ((b.upper - x).array() >= -tol).all();
                          },
                          [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
                          [&](const Simplex& s) {
                              return (x.array() >= -tol).all() &&
                                     std::abs(x.sum() - s.scale) <= tol * static_cast<double>(s.dim);
                          },
                          [&](const Halfspaces& h) {
                              for (const auto& c : h.constraints)
                                  if (c.normal.dot(x) - c.offset > tol) return false;
                              return true;
                          },
                      },
                      shape_);
}

double FeasibleSet::diameter() const {
    return std::visit(overloaded{
                          [](const Box& b) { return (b.upper - b.lower).norm(); },
                          [](const Ball& b) { return 2.0 * b.radius; },
                          [](const Simplex& s) { return s.dim > 1 ? s.scale * std::sqrt(2.0) : 0.0; },
                          [](const Halfspaces&) { return std::numeric_limits<double>::infinity(); },
                      },
                      shape_);
}

Box FeasibleSet::bounding_box() const {
    return std::visit(overloaded{
                          [](const Box& b) { return b; },
                          [](const Ball& b) {
                              const Vector r = Vector::Constant(b.center.size(), b.radius);
                              return Box{b.center - r, b.center + r};
                          },
                          [](const Simplex& s) {
                              const auto n = static_cast<Eigen::Index>(s.dim);
                              return Box{Vector::Zero(n), Vector::Constant(n, s.scale)};
                          },
                          [](const Halfspaces&) -> Box {
                              throw InvalidArgument("halfspaces: set has no bounding box");
                          },
                      },
                      shape_);
}

Vector FeasibleSet::sample(RandomStream& rng, double extent) const {
    const auto n = static_cast<Eigen::Index>(dim_);
    return std::visit(overloaded{
                          [&](const Box& b) {
                              Vector v(n);
                              for (Eigen::Index i = 0; i < n; ++i)
                                  v[i] = b.lower[i] + (b.upper[i] - b.lower[i]) * rng.uniform();
                              return v;
                          },
                          [&](const Ball& b) {
                              Vector dir(n);
                              for (Eigen::Index i = 0; i < n; ++i) dir[i] = rng.normal();
                              const double norm = dir.norm();
                              if (norm == 0.0) return Vector(b.center);
                              const double r = b.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
                              return Vector(b.center + dir * (r / norm));
                          },
                          [&](const Simplex& s) {
                              // Dirichlet(1,...,1) via normalized exponentials.
                              Vector e(n);
                              for (Eigen::Index i = 0; i < n; ++i) e[i] = -std::log(rng.uniform_open_left());
                              return Vector(e * (s.scale / e.sum()));
                          },
                          [&](const Halfspaces& h) {
                              Vector v(n);
                              for (Eigen::Index i = 0; i < n; ++i) v[i] = extent * (2.0 * rng.uniform() - 1.0);
                              return project_halfspaces(h, v);
                          },
                      },
                      shape_);
}

const char* FeasibleSet::kind_name() const {
    return std::visit(overloaded{
                          [](const Box&) { return "box"; },
                          [](const Ball&) { return "ball"; },
                          [](const Simplex&) { return "simplex"; },
                          [](const Halfspaces&) { return "halfspaces"; },
                      },
                      shape_);
}

}  // namespace incsub
