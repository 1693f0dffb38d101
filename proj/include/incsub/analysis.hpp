#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "incsub/markov.hpp"
#include "incsub/point.hpp"
#include "incsub/trace.hpp"

namespace incsub {

// ------------------------------------------------------------ chain products

/// Phi(k, l) = P(l) P(l+1) ... P(k) for matrices given in time order.
Matrix phi_product(std::span<const TransitionMatrix> matrices);

/// max_{i,j} |Phi_ij - 1/m|
double max_deviation_from_uniform(const Matrix& phi);

/// Geometric envelope |[Phi(k,l)]_ij - 1/m| <= b beta^(k-l).
struct RateConstants {
    double b = 1.0;
    double beta = 0.0;
    double eta = 0.0;
    std::size_t m = 0;
    std::size_t window = 0;

    double envelope(std::uint64_t span) const;
};

/// b = (1 - eta/(4m^2))^-2, beta = (1 - eta/(4m^2))^(1/Q)
RateConstants rate_constants(double eta, std::size_t m, std::size_t window);

/// Uniform chain P = (1/m) e e^T: beta = 0, b = 1.
RateConstants uniform_chain_rates(std::size_t m);

// --------------------------------------------------------------- bounds

struct BoundTerm {
    std::string name;
    double value;
};

/// Additive gap above f* with its itemized terms.
struct BoundReport {
    std::string theorem;
    double gap = 0.0;
    std::vector<BoundTerm> terms;
    std::vector<std::pair<std::string, double>> parameters;

    double term(const std::string& name) const;
};

struct ErrorMoments {
    double mu = 0.0;  // sup_k mu_k
    double nu = 0.0;  // sup_k nu_k
};

/// Cyclic constant-step gap: m mu D + (alpha/2)(sum C_i + m nu)^2.
/// The bias term is dropped (and D may be infinite) when mu = 0.
BoundReport cyclic_bound(double alpha, std::span<const double> bounds, ErrorMoments moments, double diameter);

/// Markov constant-step gap for integer T >= 0:
///   mu D + (alpha/2)(nu + C)^2 + alpha T C (C + nu) + b (sum C_i) beta^(T+1) D,
/// with C = max C_i.
BoundReport markov_bound(double alpha, std::span<const double> bounds, ErrorMoments moments, double diameter,
                         const RateConstants& rate, std::int64_t T);

struct OptimalT {
    std::uint64_t T = 0;            // minimizer of the T-dependent terms (ties toward smaller T)
    std::int64_t formula_T = 0;     // closed form before clamping; may be -1
    bool clamped = false;           // closed form gave -1
    bool formula_discrepancy = false;  // closed form (after clamp) is not the integer minimizer
};

/// Minimizes alpha T C (C + nu) + C0 beta^(T+1) over integers T >= 0, where
/// C0 = b (sum C_i) D. Starts from the closed form
///   T* = 0                                         if r >= 1
///   T* = ceil(ln r / ln beta) - 1                  otherwise,   r = alpha C (C+nu) / (C0 (-ln beta))
/// and walks to the exact integer minimizer. beta = 0 gives T = 0.
OptimalT optimal_T(double alpha, double C, double C0, double beta, double nu = 0.0);

/// The T-dependent part of markov_bound.
double markov_T_terms(double alpha, double C, double C0, double beta, double nu, std::uint64_t T);

/// delta(alpha, beta) = 0 if alpha >= beta, ceil(ln alpha / ln beta) - 1 otherwise.
std::uint64_t delta_T(double alpha, double beta);

/// mu D + alpha [ (nu + C)^2 / 2 + C (C + nu) delta + b (sum C_i) D ], delta = delta_T(alpha, beta).
BoundReport simple_delta_bound(double alpha, std::span<const double> bounds, ErrorMoments moments,
                               double diameter, const RateConstants& rate);

// -------------------------------------------------------- empirical checks

struct VerifyOptions {
    double relative_slack = 0.02;
    double absolute_slack = 0.0;
    std::uint64_t burn_in = 0;  // iterations ignored at the start
};

struct BoundVerdict {
    double observed_inf = 0.0;  // inf_k f(x_k) over the checked window
    double threshold = 0.0;     // f* + gap (1 + rel) + abs
    double margin = 0.0;        // threshold - observed_inf
    bool pass = false;
};

/// Checks inf_k f(x_k) <= f* + gap + slack on one trace.
BoundVerdict verify_bound_empirically(const RunTrace& trace, const BoundReport& report, double f_star,
                                      const VerifyOptions& options = {});

/// inf over the trace rows with k >= burn_in (the running inf when burn_in = 0).
double observed_inf(const RunTrace& trace, std::uint64_t burn_in = 0);

struct VerdictSummary {
    std::size_t passed = 0;
    std::size_t total = 0;
    double pass_fraction() const { return total == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(total); }
};

VerdictSummary aggregate(std::span<const BoundVerdict> verdicts);

}  // namespace incsub
