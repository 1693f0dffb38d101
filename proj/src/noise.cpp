#include "incsub/noise.hpp"

#include <cmath>

#include "incsub/errors.hpp"
#include "incsub/random.hpp"

namespace incsub {

namespace {

void check_sequence(const DecayingSequence& s, const char* what) {
    if (!(s.base >= 0.0) || !std::isfinite(s.base))
        throw InvalidArgument(std::string(what) + ": base must be finite and >= 0");
    if (!(s.decay >= 0.0) || !std::isfinite(s.decay))
        throw InvalidArgument(std::string(what) + ": decay must be finite and >= 0");
}

Vector gaussian_vector(std::size_t n, double sigma, RandomStream& rng) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = sigma * rng.normal();
    return v;
}

}  // namespace

double DecayingSequence::at(std::uint64_t k) const {
    if (k == 0) throw InvalidArgument("noise sequence index must be >= 1");
    if (decay == 0.0) return base;
    return base / std::pow(static_cast<double>(k), decay);
}

NoiseModel NoiseModel::none() { return NoiseModel(NoNoise{}); }

NoiseModel NoiseModel::gaussian(DecayingSequence sigma) {
    check_sequence(sigma, "gaussian sigma");
    return NoiseModel(GaussianNoise{sigma});
}

NoiseModel NoiseModel::biased_gaussian(DecayingSequence bias, DecayingSequence sigma, Vector direction) {
    check_sequence(bias, "bias");
    check_sequence(sigma, "biased gaussian sigma");
    if (direction.size() > 0) {
        const double norm = direction.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("bias direction must be nonzero");
        direction /= norm;
    }
    return NoiseModel(BiasedGaussianNoise{bias, sigma, std::move(direction)});
}

NoiseModel NoiseModel::bounded_uniform(DecayingSequence radius) {
    check_sequence(radius, "uniform radius");
    return NoiseModel(BoundedUniformNoise{radius});
}

NoiseModel NoiseModel::gaussian_with_nu(double nu, std::size_t n) {
    if (n == 0) throw InvalidArgument("dimension must be >= 1");
    return gaussian({nu / std::sqrt(static_cast<double>(n)), 0.0});
}

double NoiseModel::mu(std::uint64_t k, std::size_t) const {
    if (const auto* b = std::get_if<BiasedGaussianNoise>(&kind_)) return b->bias.at(k);
    return 0.0;
}

double NoiseModel::nu(std::uint64_t k, std::size_t n) const {
    const double dn = static_cast<double>(n);
    if (const auto* g = std::get_if<GaussianNoise>(&kind_)) return g->sigma.at(k) * std::sqrt(dn);
    if (const auto* b = std::get_if<BiasedGaussianNoise>(&kind_)) {
        const double bias = b->bias.at(k);
        const double sigma = b->sigma.at(k);
        return std::sqrt(bias * bias + dn * sigma * sigma);
    }
    if (const auto* u = std::get_if<BoundedUniformNoise>(&kind_)) return u->radius.at(k);
    return 0.0;
}

bool NoiseModel::zero_mean() const { return !std::holds_alternative<BiasedGaussianNoise>(kind_) || sup_mu(1) == 0.0; }

Vector NoiseModel::draw(std::uint64_t k, std::size_t n, RandomStream& rng) const {
    const auto dim = static_cast<Eigen::Index>(n);
    if (std::holds_alternative<NoNoise>(kind_)) return Vector::Zero(dim);
    if (const auto* g = std::get_if<GaussianNoise>(&kind_)) return gaussian_vector(n, g->sigma.at(k), rng);
    if (const auto* b = std::get_if<BiasedGaussianNoise>(&kind_)) {
        Vector eps = gaussian_vector(n, b->sigma.at(k), rng);
        const double bias = b->bias.at(k);
        if (b->direction.size() == 0) {
            eps[0] += bias;
        } else {
            if (b->direction.size() != dim) throw DimensionMismatch(n, static_cast<std::size_t>(b->direction.size()));
            eps += bias * b->direction;
        }
        return eps;
    }
    const auto& u = std::get<BoundedUniformNoise>(kind_);
    const double radius = u.radius.at(k);
    Vector dir = gaussian_vector(n, 1.0, rng);
    const double norm = dir.norm();
    if (norm == 0.0 || radius == 0.0) return Vector::Zero(dim);
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    return dir * (r / norm);
}

Vector noisy_subgradient(const ComponentObjective& obj, const NoiseModel& noise, const Vector& x,
                         std::uint64_t k, RandomStream& rng) {
    Vector g = obj.subgradient(x);
    require_same_dim(x, g);
    if (noise.is_none()) return g;
    return g + noise.draw(k, static_cast<std::size_t>(x.size()), rng);
}

}  // namespace incsub
