#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "incsub/objective.hpp"
#include "incsub/point.hpp"

namespace incsub {

class RandomStream;

/// value_k = base / k^decay, k >= 1.
struct DecayingSequence {
    double base = 0.0;
    double decay = 0.0;

    double at(std::uint64_t k) const;
    double sup() const { return base; }  // decay >= 0, so k = 1 is the largest
};

struct NoNoise {};

struct GaussianNoise {
    DecayingSequence sigma;  // per-coordinate standard deviation
};

/// Gaussian noise plus a deterministic offset of norm bias_k along `direction`.
struct BiasedGaussianNoise {
    DecayingSequence bias;
    DecayingSequence sigma;
    Vector direction;  // normalized at construction; empty means e_1
};

/// Uniform on the ball of radius radius_k.
struct BoundedUniformNoise {
    DecayingSequence radius;
};

/// Subgradient error model with declared moment bounds
///   ||E[eps_k | past]|| <= mu_k,   sqrt(E[||eps_k||^2 | past]) <= nu_k.
class NoiseModel {
public:
    using Variant = std::variant<NoNoise, GaussianNoise, BiasedGaussianNoise, BoundedUniformNoise>;

    static NoiseModel none();
    static NoiseModel gaussian(DecayingSequence sigma);
    static NoiseModel biased_gaussian(DecayingSequence bias, DecayingSequence sigma, Vector direction = {});
    static NoiseModel bounded_uniform(DecayingSequence radius);

    /// Gaussian noise with sigma chosen so that nu_k = nu exactly in dimension n.
    static NoiseModel gaussian_with_nu(double nu, std::size_t n);

    double mu(std::uint64_t k, std::size_t n) const;
    double nu(std::uint64_t k, std::size_t n) const;
    double sup_mu(std::size_t n) const { return mu(1, n); }
    double sup_nu(std::size_t n) const { return nu(1, n); }

    bool is_none() const { return std::holds_alternative<NoNoise>(kind_); }
    bool zero_mean() const;

    /// One draw of eps at iteration k in dimension n.
    Vector draw(std::uint64_t k, std::size_t n, RandomStream& rng) const;

    const Variant& kind() const { return kind_; }

private:
    explicit NoiseModel(Variant v) : kind_(std::move(v)) {}
    Variant kind_;
};

/// grad f_i(x) + eps_{i,k}
Vector noisy_subgradient(const ComponentObjective& obj, const NoiseModel& noise, const Vector& x,
                         std::uint64_t k, RandomStream& rng);

}  // namespace incsub
