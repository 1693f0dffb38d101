#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "incsub/feasible_set.hpp"
#include "incsub/objective.hpp"

namespace incsub {

enum class CertificateMethod { ClosedForm, GridSearch, Unknown };

const char* to_string(CertificateMethod m);

struct OptimumCertificate {
    double f_star = 0.0;
    std::optional<DecisionPoint> witness;
    CertificateMethod method = CertificateMethod::Unknown;
    double resolution = 0.0;  // GridSearch only
    double tolerance = 0.0;   // f(witness) - f_star <= tolerance
};

/// minimize sum_i f_i(x) over X
struct ProblemInstance {
    std::string name;
    std::vector<ComponentObjective> components;
    FeasibleSet set;
    OptimumCertificate optimum;
    // Relative margin applied to sampled subgradient bounds (0 when analytic).
    double bound_margin = 0.0;
    bool rank_deficient = false;

    std::size_t agents() const { return components.size(); }
    std::size_t dim() const { return set.dim(); }

    double value(const Vector& x) const;
    Vector subgradient(const Vector& x) const;

    double total_bound() const;  // sum_i C_i
    double max_bound() const;    // max_i C_i
    std::vector<double> bounds() const;
};

struct GridSearchResult {
    Vector best_x;
    double best_f;
    double resolution;
    std::uint64_t points;
};

/// Exhaustive minimization of f over a lattice of spacing `resolution`
/// restricted to X. The spacing is coarsened when the lattice would exceed
/// `max_points`.
GridSearchResult grid_search(const std::function<double(const Vector&)>& f, const FeasibleSet& set,
                             double resolution, std::uint64_t max_points = 200'000'000);

/// Lattice size grid_search would visit at a given resolution.
std::uint64_t grid_point_count(const FeasibleSet& set, double resolution);

// ---------------------------------------------------------------- regression

/// h(s; x) = sum_j x_j * s^powers[j]
struct MonomialBasis {
    std::vector<int> powers;

    std::size_t size() const { return powers.size(); }
    Vector features(double s) const;
};

struct RegressionSpec {
    std::vector<double> locations;              // s_i, one per agent
    MonomialBasis basis;
    std::vector<std::vector<double>> samples;   // r_{i,k}; generated when empty
    // Sample generation: r = h(s_i; true_x) + N(0, noise_sigma^2).
    Vector true_x;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    std::size_t samples_per_agent = 0;
    double grid_resolution = 1e-4;
};

/// f_i(x) = mean_k (r_{i,k} - h(s_i; x))^2
ProblemInstance make_regression(const RegressionSpec& spec, const FeasibleSet& set);

// ---------------------------------------------------------------- allocation

enum class UtilityKind { Log1p, Sqrt, Linear, CappedLinear };

/// Concave increasing reward of one coordinate:
///   Log1p: w*log(1+t)     Sqrt: w*sqrt(t), tangent-extended below `param`
///   Linear: w*t           CappedLinear: min(w*t, param)
struct Utility {
    UtilityKind kind = UtilityKind::Linear;
    double weight = 1.0;
    double param = 0.0;  // Sqrt knee (default 1e-2) or CappedLinear cap

    double value(double t) const;
    double slope(double t) const;
};

const char* to_string(UtilityKind k);

/// maximize sum_i U_i(x_i) as minimize sum_i -U_i(x_i); one agent per coordinate.
ProblemInstance make_allocation(const std::vector<Utility>& utilities, const FeasibleSet& set,
                                double grid_resolution = 1e-4);

// ----------------------------------------------------------------- quadratic

/// f_i(x) = ||x - c_i||^2 with the given centers.
ProblemInstance make_quadratic(const std::vector<Vector>& centers, const FeasibleSet& set);

/// Centers drawn uniformly in the ball of radius `spread` about the origin.
ProblemInstance make_quadratic_suite(std::size_t m, std::size_t n, double spread, const FeasibleSet& set,
                                     std::uint64_t seed);

/// ||x - c||^2 over X, with C = 2 max_{x in X} ||x - c||.
ComponentObjective quadratic_component(const Vector& center, const FeasibleSet& set);

/// max_{x in X} ||x - c|| (analytic for Box/Ball/Simplex).
double farthest_distance(const FeasibleSet& set, const Vector& c);

/// Largest subgradient norm seen over `samples` random points, times (1 + margin).
double sampled_bound(const ComponentObjective& obj, const FeasibleSet& set, std::size_t samples,
                     double margin, std::uint64_t seed);

}  // namespace incsub
