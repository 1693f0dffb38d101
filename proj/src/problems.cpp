#include "incsub/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "incsub/errors.hpp"
#include "incsub/random.hpp"

namespace incsub {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// max_{x in X} d^T x
double support(const FeasibleSet& set, const Vector& d) {
    return std::visit(overloaded{
                          [&](const Box& b) {
                              double s = 0.0;
                              for (Eigen::Index i = 0; i < d.size(); ++i)
                                  s += std::max(d[i] * b.lower[i], d[i] * b.upper[i]);
                              return s;
                          },
                          [&](const Ball& b) { return d.dot(b.center) + b.radius * d.norm(); },
                          [&](const Simplex& s) { return s.scale * d.maxCoeff(); },
                          [](const Halfspaces&) { return kInf; },
                      },
                      set.variant());
}

double closed_form_tolerance(double f_star) { return 1e-9 * std::max(1.0, std::abs(f_star)); }

OptimumCertificate grid_certificate(const ProblemInstance& p, double resolution) {
    const auto result = grid_search([&](const Vector& x) { return p.value(x); }, p.set, resolution);
    OptimumCertificate cert;
    cert.f_star = result.best_f;
    cert.witness = DecisionPoint(result.best_x);
    cert.method = CertificateMethod::GridSearch;
    cert.resolution = result.resolution;
    cert.tolerance = p.total_bound() * result.resolution * std::sqrt(static_cast<double>(p.dim()));
    return cert;
}

// Best point of a long projected subgradient run; used only when no
// certificate is available.
OptimumCertificate estimate_optimum(const ProblemInstance& p, const Vector& start) {
    Vector x = p.set.project(start);
    Vector best = x;
    double best_f = p.value(x);
    const double scale = p.set.bounded() ? p.set.diameter() : 1.0;
    const double c = std::max(p.total_bound(), 1e-12);
    for (int k = 1; k <= 200000; ++k) {
        const Vector g = p.subgradient(x);
        const double gn = g.norm();
        if (gn == 0.0) break;
        x = p.set.project(Vector(x - (scale / (c * std::sqrt(static_cast<double>(k)))) * g));
        const double fx = p.value(x);
        if (fx < best_f) {
            best_f = fx;
            best = x;
        }
    }
    OptimumCertificate cert;
    cert.f_star = best_f;
    cert.witness = DecisionPoint(best);
    cert.method = CertificateMethod::Unknown;
    return cert;
}

}  // namespace

const char* to_string(CertificateMethod m) {
    switch (m) {
        case CertificateMethod::ClosedForm: return "closed_form";
        case CertificateMethod::GridSearch: return "grid_search";
        case CertificateMethod::Unknown: return "unknown";
    }
    return "unknown";
}

double ProblemInstance::value(const Vector& x) const {
    double total = 0.0;
    for (const auto& c : components) total += c.value(x);
    return total;
}

Vector ProblemInstance::subgradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for (const auto& c : components) g += c.subgradient(x);
    return g;
}

double ProblemInstance::total_bound() const {
    double s = 0.0;
    for (const auto& c : components) s += c.bound;
    return s;
}

double ProblemInstance::max_bound() const {
    double s = 0.0;
    for (const auto& c : components) s = std::max(s, c.bound);
    return s;
}

std::vector<double> ProblemInstance::bounds() const {
    std::vector<double> out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(c.bound);
    return out;
}

// ---------------------------------------------------------------- grid search

namespace {

struct Lattice {
    std::vector<Eigen::Index> counts;  // points per axis (Box/Ball) or steps N (Simplex)
    double spacing = 0.0;
};

Lattice box_lattice(const Box& b, double h) {
    Lattice l;
    for (Eigen::Index i = 0; i < b.lower.size(); ++i) {
        const double width = b.upper[i] - b.lower[i];
        const auto steps = static_cast<Eigen::Index>(std::ceil(width / h - 1e-9));
        l.counts.push_back(std::max<Eigen::Index>(steps, 0) + 1);
        if (steps > 0) l.spacing = std::max(l.spacing, width / static_cast<double>(steps));
    }
    return l;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    long double r = 1.0L;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    const long double cap = static_cast<long double>(std::numeric_limits<std::uint64_t>::max());
    return r >= cap ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(r + 0.5L);
}

}  // namespace

std::uint64_t grid_point_count(const FeasibleSet& set, double resolution) {
    if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be > 0");
    if (const auto* s = std::get_if<Simplex>(&set.variant())) {
        const auto steps = static_cast<std::uint64_t>(std::ceil(s->scale / resolution - 1e-9));
        return binomial(steps + s->dim - 1, s->dim - 1);
    }
    const Lattice l = box_lattice(set.bounding_box(), resolution);
    long double total = 1.0L;
    for (auto c : l.counts) total *= static_cast<long double>(c);
    const long double cap = static_cast<long double>(std::numeric_limits<std::uint64_t>::max());
    return total >= cap ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(total);
}

GridSearchResult grid_search(const std::function<double(const Vector&)>& f, const FeasibleSet& set,
                             double resolution, std::uint64_t max_points) {
    if (!set.bounded()) throw InvalidArgument("grid search requires a bounded set");
    double h = resolution;
    while (grid_point_count(set, h) > max_points) {
        const double ratio = static_cast<double>(grid_point_count(set, h)) / static_cast<double>(max_points);
        h *= std::max(1.01, std::pow(ratio, 1.0 / static_cast<double>(set.dim())));
    }

    const auto n = static_cast<Eigen::Index>(set.dim());
    GridSearchResult best{Vector(), std::numeric_limits<double>::infinity(), h, 0};
    Vector x(n);
    auto visit = [&]() {
        ++best.points;
        const double v = f(x);
        if (v < best.best_f) {
            best.best_f = v;
            best.best_x = x;
        }
    };

    if (const auto* s = std::get_if<Simplex>(&set.variant())) {
        const auto steps = static_cast<Eigen::Index>(std::ceil(s->scale / h - 1e-9));
        const double cell = s->scale / static_cast<double>(steps);
        best.resolution = cell;
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);
        // Odometer over the first n-1 coordinates with partial sums <= steps.
        while (true) {
            Eigen::Index used = 0;
            for (Eigen::Index i = 0; i + 1 < n; ++i) {
                x[i] = cell * static_cast<double>(idx[static_cast<std::size_t>(i)]);
                used += idx[static_cast<std::size_t>(i)];
            }
            x[n - 1] = cell * static_cast<double>(steps - used);
            visit();
            Eigen::Index axis = 0;
            for (; axis + 1 < n; ++axis) {
                auto& slot = idx[static_cast<std::size_t>(axis)];
                ++slot;
                Eigen::Index total = 0;
                for (Eigen::Index j = 0; j + 1 < n; ++j) total += idx[static_cast<std::size_t>(j)];
                if (total <= steps) break;
                slot = 0;
            }
            if (axis + 1 >= n) break;
        }
        return best;
    }

    const Box bb = set.bounding_box();
    const Lattice l = box_lattice(bb, h);
    best.resolution = l.spacing;
    const bool filter = !std::holds_alternative<Box>(set.variant());
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = l.counts[static_cast<std::size_t>(i)];
            const auto j = idx[static_cast<std::size_t>(i)];
            x[i] = c == 1 ? bb.lower[i]
                          : bb.lower[i] + (bb.upper[i] - bb.lower[i]) * static_cast<double>(j) /
                                              static_cast<double>(c - 1);
        }
        if (!filter || set.contains(x, 0.0)) visit();
        Eigen::Index axis = 0;
        for (; axis < n; ++axis) {
            auto& slot = idx[static_cast<std::size_t>(axis)];
            if (++slot < l.counts[static_cast<std::size_t>(axis)]) break;
            slot = 0;
        }
        if (axis == n) break;
    }
    if (best.points == 0) throw InvalidArgument("grid search: no lattice point inside the set");
    return best;
}

// ----------------------------------------------------------------- quadratic

double farthest_distance(const FeasibleSet& set, const Vector& c) {
    return std::visit(overloaded{
                          [&](const Box& b) {
                              return (c - b.lower).cwiseAbs().cwiseMax((b.upper - c).cwiseAbs()).norm();
                          },
                          [&](const Ball& b) { return (c - b.center).norm() + b.radius; },
                          [&](const Simplex& s) {
                              double worst = 0.0;
                              for (std::size_t j = 0; j < s.dim; ++j) {
                                  Vector vertex = Vector::Zero(c.size());
                                  vertex[static_cast<Eigen::Index>(j)] = s.scale;
                                  worst = std::max(worst, (vertex - c).norm());
                              }
                              return worst;
                          },
                          [](const Halfspaces&) { return kInf; },
                      },
                      set.variant());
}

double sampled_bound(const ComponentObjective& obj, const FeasibleSet& set, std::size_t samples, double margin,
                     std::uint64_t seed) {
    RandomStream rng(seed, StreamTag::Fixture, 0x5A);
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) worst = std::max(worst, obj.subgradient(set.sample(rng)).norm());
    return worst * (1.0 + margin);
}

ComponentObjective quadratic_component(const Vector& center, const FeasibleSet& set) {
    if (static_cast<std::size_t>(center.size()) != set.dim())
        throw DimensionMismatch(set.dim(), static_cast<std::size_t>(center.size()));
    ComponentObjective obj;
    obj.value = [center](const Vector& x) { return (x - center).squaredNorm(); };
    obj.subgradient = [center](const Vector& x) { return Vector(2.0 * (x - center)); };
    obj.bound = 2.0 * farthest_distance(set, center);
    obj.label = "quadratic";
    return obj;
}

ProblemInstance make_quadratic(const std::vector<Vector>& centers, const FeasibleSet& set) {
    if (centers.empty()) throw InvalidArgument("quadratic: need at least one center");
    ProblemInstance p{"quadratic", {}, set, {}};
    Vector centroid = Vector::Zero(static_cast<Eigen::Index>(set.dim()));
    for (const auto& c : centers) {
        p.components.push_back(quadratic_component(c, set));
        centroid += c;
    }
    centroid /= static_cast<double>(centers.size());
    if (!set.bounded()) {
        p.bound_margin = 0.1;
        for (std::size_t i = 0; i < p.components.size(); ++i)
            p.components[i].bound = sampled_bound(p.components[i], set, 10000, p.bound_margin, i);
    }
    // f = m ||x - centroid||^2 + const, so the projected centroid is optimal.
    const Vector witness = set.project(centroid);
    p.optimum.witness = DecisionPoint(witness);
    p.optimum.f_star = p.value(witness);
    p.optimum.method = CertificateMethod::ClosedForm;
    p.optimum.tolerance = closed_form_tolerance(p.optimum.f_star);
    return p;
}

ProblemInstance make_quadratic_suite(std::size_t m, std::size_t n, double spread, const FeasibleSet& set,
                                     std::uint64_t seed) {
    if (m == 0 || n == 0) throw InvalidArgument("quadratic suite: m and n must be >= 1");
    if (set.dim() != n) throw DimensionMismatch(n, set.dim());
    if (!(spread >= 0.0)) throw InvalidArgument("quadratic suite: spread must be >= 0");
    RandomStream rng(seed, StreamTag::Fixture, 0x0C);
    std::vector<Vector> centers;
    const auto dim = static_cast<Eigen::Index>(n);
    for (std::size_t i = 0; i < m; ++i) {
        if (spread == 0.0) {
            centers.push_back(Vector::Zero(dim));
            continue;
        }
        const FeasibleSet ball = FeasibleSet::ball(Vector::Zero(dim), spread);
        centers.push_back(ball.sample(rng));
    }
    auto p = make_quadratic(centers, set);
    p.name = "quadratic_suite";
    return p;
}

// ---------------------------------------------------------------- regression

Vector MonomialBasis::features(double s) const {
    Vector phi(static_cast<Eigen::Index>(powers.size()));
    for (std::size_t j = 0; j < powers.size(); ++j) phi[static_cast<Eigen::Index>(j)] = std::pow(s, powers[j]);
    return phi;
}

ProblemInstance make_regression(const RegressionSpec& spec, const FeasibleSet& set) {
    const std::size_t m = spec.locations.size();
    const std::size_t n = spec.basis.size();
    if (m == 0) throw InvalidArgument("regression: no sensor locations");
    if (n == 0) throw InvalidArgument("regression: empty basis");
    if (set.dim() != n) throw DimensionMismatch(n, set.dim());
    if (!set.bounded()) throw InvalidArgument("regression: feasible set must be bounded");

    std::vector<std::vector<double>> samples = spec.samples;
    if (samples.empty()) {
        if (spec.samples_per_agent == 0) throw InvalidArgument("regression: zero samples per agent");
        if (static_cast<std::size_t>(spec.true_x.size()) != n)
            throw DimensionMismatch(n, static_cast<std::size_t>(spec.true_x.size()));
        samples.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            RandomStream rng(spec.noise_seed, StreamTag::Fixture, 0xE6, i);
            const double clean = spec.basis.features(spec.locations[i]).dot(spec.true_x);
            for (std::size_t k = 0; k < spec.samples_per_agent; ++k)
                samples[i].push_back(clean + spec.noise_sigma * rng.normal());
        }
    }
    if (samples.size() != m) throw InvalidArgument("regression: need one sample list per agent");

    ProblemInstance p{"regression", {}, set, {}};
    Matrix normal = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = samples[i];
        if (r.empty()) throw InvalidArgument("regression: agent " + std::to_string(i) + " has zero samples");
        double mean = 0.0;
        for (double v : r) mean += v;
        mean /= static_cast<double>(r.size());
        double var = 0.0;
        for (double v : r) var += (v - mean) * (v - mean);
        var /= static_cast<double>(r.size());

        const Vector phi = spec.basis.features(spec.locations[i]);
        if (!phi.allFinite()) throw InvalidArgument("regression: basis not finite at a sensor location");
        normal += phi * phi.transpose();
        rhs += mean * phi;

        ComponentObjective obj;
        obj.value = [phi, mean, var](const Vector& x) {
            const double resid = phi.dot(x) - mean;
            return resid * resid + var;
        };
        obj.subgradient = [phi, mean](const Vector& x) { return Vector(2.0 * (phi.dot(x) - mean) * phi); };
        const double hi = support(set, phi) - mean;
        const double lo = mean + support(set, Vector(-phi));
        obj.bound = 2.0 * phi.norm() * std::max({hi, lo, 0.0});
        obj.label = "regression";
        p.components.push_back(std::move(obj));
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(normal);
    p.rank_deficient = qr.rank() < static_cast<Eigen::Index>(n);
    if (!p.rank_deficient) {
        const Vector ls = qr.solve(rhs);
        if (set.contains(ls, 0.0)) {
            p.optimum.witness = DecisionPoint(ls);
            p.optimum.f_star = p.value(ls);
            p.optimum.method = CertificateMethod::ClosedForm;
            p.optimum.tolerance = closed_form_tolerance(p.optimum.f_star);
            return p;
        }
    }
    if (n <= 3) {
        p.optimum = grid_certificate(p, spec.grid_resolution);
    } else {
        p.optimum = estimate_optimum(p, Vector::Zero(static_cast<Eigen::Index>(n)));
    }
    return p;
}

// ---------------------------------------------------------------- allocation

const char* to_string(UtilityKind k) {
    switch (k) {
        case UtilityKind::Log1p: return "log1p";
        case UtilityKind::Sqrt: return "sqrt";
        case UtilityKind::Linear: return "linear";
        case UtilityKind::CappedLinear: return "capped";
    }
    return "linear";
}

namespace {

double sqrt_knee(const Utility& u) { return u.param > 0.0 ? u.param : 1e-2; }

}  // namespace

double Utility::value(double t) const {
    switch (kind) {
        case UtilityKind::Log1p: return weight * std::log1p(t);
        case UtilityKind::Sqrt: {
            const double knee = sqrt_knee(*this);
            if (t >= knee) return weight * std::sqrt(t);
            const double root = std::sqrt(knee);
            return weight * (root + (t - knee) / (2.0 * root));
        }
        case UtilityKind::Linear: return weight * t;
        case UtilityKind::CappedLinear: return std::min(weight * t, param);
    }
    return 0.0;
}

double Utility::slope(double t) const {
    switch (kind) {
        case UtilityKind::Log1p: return weight / (1.0 + t);
        case UtilityKind::Sqrt: return weight / (2.0 * std::sqrt(std::max(t, sqrt_knee(*this))));
        case UtilityKind::Linear: return weight;
        case UtilityKind::CappedLinear: return weight * t < param ? weight : 0.0;
    }
    return 0.0;
}

ProblemInstance make_allocation(const std::vector<Utility>& utilities, const FeasibleSet& set,
                                double grid_resolution) {
    const std::size_t m = utilities.size();
    if (m == 0) throw InvalidArgument("allocation: no utilities");
    if (set.dim() != m) throw DimensionMismatch(m, set.dim());
    if (!set.bounded()) throw InvalidArgument("allocation: feasible set must be bounded");
    const Box range = set.bounding_box();

    ProblemInstance p{"allocation", {}, set, {}};
    for (std::size_t i = 0; i < m; ++i) {
        const Utility u = utilities[i];
        const auto axis = static_cast<Eigen::Index>(i);
        const double lo = range.lower[axis];
        const double hi = range.upper[axis];
        const std::string who = "allocation: utility " + std::to_string(i) + " (" + to_string(u.kind) + ")";
        if (!std::isfinite(u.weight) || !std::isfinite(u.param)) throw InvalidArgument(who + " has non-finite parameters");
        if (u.kind == UtilityKind::Log1p && lo <= -1.0) throw InvalidArgument(who + " undefined below -1");

        // Randomized midpoint concavity and monotonicity checks on [lo, hi].
        RandomStream rng(0xA110CA7E, StreamTag::Fixture, i);
        for (int trial = 0; trial < 256; ++trial) {
            double a = lo + (hi - lo) * rng.uniform();
            double b = lo + (hi - lo) * rng.uniform();
            if (a > b) std::swap(a, b);
            const double ua = u.value(a), ub = u.value(b), mid = u.value(0.5 * (a + b));
            const double scale = 1e-12 * std::max({1.0, std::abs(ua), std::abs(ub)});
            if (mid < 0.5 * (ua + ub) - scale) throw InvalidArgument(who + " is not concave");
            if (ub < ua - scale) throw InvalidArgument(who + " is not increasing");
        }

        ComponentObjective obj;
        obj.value = [u, axis](const Vector& x) { return -u.value(x[axis]); };
        obj.subgradient = [u, axis](const Vector& x) {
            Vector g = Vector::Zero(x.size());
            g[axis] = -u.slope(x[axis]);
            return g;
        };
        // Slopes of a concave function decrease, so the largest is at the left end.
        obj.bound = std::abs(u.slope(lo));
        obj.label = std::string("allocation:") + to_string(u.kind);
        p.components.push_back(std::move(obj));
    }

    if (m <= 3) {
        p.optimum = grid_certificate(p, grid_resolution);
    } else {
        p.optimum = estimate_optimum(p, set.project(Vector::Zero(static_cast<Eigen::Index>(m))));
    }
    return p;
}

}  // namespace incsub
