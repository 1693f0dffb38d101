#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "incsub/analysis.hpp"
#include "incsub/errors.hpp"
#include "incsub/random.hpp"

using namespace incsub;

namespace {

double sum_terms(const BoundReport& r) {
    double s = 0.0;
    for (const auto& t : r.terms) s += t.value;
    return s;
}

// Exhaustive minimizer of alpha T C (C + nu) + C0 beta^(T+1) over [0, horizon].
std::uint64_t brute_force_T(double alpha, double C, double C0, double beta, double nu, std::uint64_t horizon) {
    std::uint64_t best = 0;
    double best_v = C0 * beta;
    for (std::uint64_t T = 1; T <= horizon; ++T) {
        const double v = alpha * double(T) * C * (C + nu) + C0 * std::pow(beta, double(T + 1));
        if (v < best_v) best = T, best_v = v;
    }
    return best;
}

}  // namespace

TEST(RateConstants, ClosedFormValues) {
    const auto r = rate_constants(0.5, 2, 1);
    EXPECT_NEAR(r.b, 1.0 / ((31.0 / 32) * (31.0 / 32)), 1e-15);
    EXPECT_NEAR(r.b, 1.06556, 1e-5);
    EXPECT_DOUBLE_EQ(r.beta, 0.96875);
    const auto one = rate_constants(1.0, 1, 1);
    EXPECT_NEAR(one.b, 16.0 / 9.0, 1e-15);
    EXPECT_DOUBLE_EQ(one.beta, 0.75);
    EXPECT_NEAR(rate_constants(0.5, 2, 3).beta, std::cbrt(0.96875), 1e-15);
    EXPECT_DOUBLE_EQ(r.envelope(2), r.b * r.beta * r.beta);
}

TEST(RateConstants, BetaGrowsWithWindow) {
    double prev = 0.0;
    for (std::size_t q = 1; q < 50; ++q) {
        const double beta = rate_constants(0.2, 5, q).beta;
        EXPECT_GT(beta, prev);
        EXPECT_LT(beta, 1.0);
        prev = beta;
    }
    EXPECT_THROW(rate_constants(0.0, 2, 1), InvalidArgument);
    EXPECT_THROW(rate_constants(0.5, 0, 1), InvalidArgument);
    EXPECT_THROW(rate_constants(0.5, 2, 0), InvalidArgument);
}

TEST(Phi, ProductsOfKnownMatrices) {
    const auto p = build_transition(Scheme::equal_probability(), Graph::path(3));
    std::vector<TransitionMatrix> one{p};
    EXPECT_EQ(phi_product(one), p.entries);

    TransitionMatrix u{Matrix::Constant(4, 4, 0.25), 0.25};
    std::vector<TransitionMatrix> us(5, u);
    EXPECT_LE((phi_product(us) - u.entries).cwiseAbs().maxCoeff(), 1e-16);

    // Order: Phi(k, l) = P(l) ... P(k).
    TransitionMatrix a{Matrix::Identity(2, 2), 1.0}, b{Matrix::Identity(2, 2), 1.0};
    a.entries << 0.9, 0.1, 0.1, 0.9;
    b.entries << 0.5, 0.5, 0.5, 0.5;
    std::vector<TransitionMatrix> ab{a, b};
    EXPECT_LE((phi_product(ab) - a.entries * b.entries).cwiseAbs().maxCoeff(), 1e-16);
    std::vector<TransitionMatrix> mixed{p, u};
    EXPECT_THROW(phi_product(mixed), DimensionMismatch);
}

TEST(Phi, RandomTopologyProductWithinEnvelope) {
    const auto topo = make_topology(RandomEdgeTopology{Graph::complete(5), 0.3, 2, 3});
    for (const auto& scheme : {Scheme::equal_probability(), Scheme::min_equal_neighbor(),
                               Scheme::weighted_metropolis_hastings({0.3, 0.6, 0.5, 0.2, 0.8})}) {
        std::vector<TransitionMatrix> ps;
        for (std::uint64_t k = 0; k < 50; ++k) ps.push_back(build_transition(scheme, topo.graph_at(k)));
        const Matrix phi = phi_product(ps);
        EXPECT_LE((phi.rowwise().sum().array() - 1.0).abs().maxCoeff(), 50 * 1e-12);
        EXPECT_LE((phi.colwise().sum().array() - 1.0).abs().maxCoeff(), 50 * 1e-12);
        const auto rate = rate_constants(topology_eta(scheme, topo), 5, topo.window());
        EXPECT_LE(max_deviation_from_uniform(phi), rate.envelope(49) + 1e-10) << to_string(scheme.kind);
    }
}

TEST(CyclicBound, Examples) {
    const std::vector<double> C{1.0, 1.0};
    const auto r = cyclic_bound(0.1, C, {0.0, 1.0}, 1.0);
    EXPECT_NEAR(r.gap, 0.8, 1e-15);
    EXPECT_NEAR(sum_terms(r), r.gap, 1e-12);
    EXPECT_DOUBLE_EQ(r.term("bias"), 0.0);

    const std::vector<double> C3{1.5, 2.0, 0.25};
    EXPECT_DOUBLE_EQ(cyclic_bound(0.01, C3, {}, INFINITY).gap, 0.005 * 3.75 * 3.75);

    const auto biased = cyclic_bound(1e-9, C, {0.2, 0.5}, 3.0);
    EXPECT_NEAR(biased.gap, 2 * 0.2 * 3.0, 1e-8);
    EXPECT_THROW(cyclic_bound(0.1, C, {0.2, 0.5}, INFINITY), InvalidArgument);
    EXPECT_THROW(cyclic_bound(0.0, C, {}, 1.0), InvalidArgument);
}

TEST(MarkovBound, SubstitutionExample) {
    const std::vector<double> C{1.0, 1.0};
    const RateConstants rate{1.0656, 0.96875, 0.5, 2, 1};
    const auto r = markov_bound(0.01, C, {}, 1.0, rate, 3);
    const double expected = 0.005 + 0.03 + 1.0656 * 2 * std::pow(0.96875, 4);
    EXPECT_NEAR(r.gap, expected, 1e-14);
    EXPECT_NEAR(sum_terms(r), r.gap, 1e-12);
    EXPECT_NEAR(r.term("step"), 0.005, 1e-16);
    EXPECT_NEAR(r.term("window"), 0.03, 1e-16);
    EXPECT_THROW(markov_bound(0.01, C, {}, 1.0, rate, -1), InvalidArgument);
    EXPECT_THROW(markov_bound(0.01, C, {}, INFINITY, rate, 0), InvalidArgument);
}

TEST(MarkovBound, UniformChainImprovesCyclicByFactorM) {
    const std::vector<double> C(4, 1.0);
    const auto markov = markov_bound(0.02, C, {}, 2.0, uniform_chain_rates(4), 0);
    EXPECT_DOUBLE_EQ(markov.gap, 0.01);
    EXPECT_NEAR(cyclic_bound(0.02, C, {}, 2.0).gap / markov.gap, 16.0, 1e-12);
}

TEST(MarkovBound, MonotoneInAlphaMuNuDiameter) {
    RandomStream rng(21, StreamTag::Fixture);
    for (int t = 0; t < 500; ++t) {
        const std::vector<double> C{0.1 + rng.uniform(), 0.1 + 2 * rng.uniform(), 0.1 + rng.uniform()};
        const RateConstants rate = rate_constants(0.05 + 0.9 * rng.uniform(), 3, 1 + rng.below(3));
        const double a = 1e-3 + rng.uniform(), mu = rng.uniform(), nu = mu + rng.uniform(), D = 0.1 + rng.uniform();
        const auto T = static_cast<std::int64_t>(rng.below(50));
        const double base = markov_bound(a, C, {mu, nu}, D, rate, T).gap;
        EXPECT_LE(base, markov_bound(a * 1.1, C, {mu, nu}, D, rate, T).gap);
        EXPECT_LE(base, markov_bound(a, C, {mu * 1.1, nu * 1.1 + 1e-3}, D, rate, T).gap);
        EXPECT_LE(base, markov_bound(a, C, {mu, nu * 1.1 + 1e-3}, D, rate, T).gap);
        EXPECT_LE(base, markov_bound(a, C, {mu, nu}, D * 1.1, rate, T).gap);
    }
}

TEST(OptimalT, RatioAtLeastOneGivesZero) {
    const auto o = optimal_T(1.0, 1.0, 0.5, 0.5);
    EXPECT_EQ(o.T, 0u);
    EXPECT_EQ(o.formula_T, 0);
}

TEST(OptimalT, SmallAlphaMatchesFormulaAndBruteForce) {
    const double alpha = 1e-6, C = 1.0, C0 = 10.0, beta = 0.9;
    const double ratio = alpha * C * C / (C0 * -std::log(beta));
    EXPECT_NEAR(ratio, 9.49e-7, 1e-9);
    const auto o = optimal_T(alpha, C, C0, beta);
    EXPECT_EQ(o.formula_T, static_cast<std::int64_t>(std::ceil(std::log(ratio) / std::log(beta))) - 1);
    EXPECT_EQ(o.T, brute_force_T(alpha, C, C0, beta, 0.0, 2000));
}

TEST(OptimalT, RandomTuplesAreLocalAndGlobalMinimizers) {
    RandomStream rng(33, StreamTag::Fixture);
    for (int t = 0; t < 1000; ++t) {
        const double alpha = std::pow(10.0, -4 + 4 * rng.uniform());
        const double C = 0.1 + 4.9 * rng.uniform(), C0 = 0.1 + 49.9 * rng.uniform();
        const double beta = 0.3 + 0.69 * rng.uniform(), nu = rng.uniform();
        const auto o = optimal_T(alpha, C, C0, beta, nu);
        const double at = markov_T_terms(alpha, C, C0, beta, nu, o.T);
        EXPECT_LE(at, markov_T_terms(alpha, C, C0, beta, nu, o.T + 1));
        if (o.T > 0) EXPECT_LT(at, markov_T_terms(alpha, C, C0, beta, nu, o.T - 1));
        EXPECT_EQ(o.T, brute_force_T(alpha, C, C0, beta, nu, 5000));
    }
}

TEST(OptimalT, ClampAndDomain) {
    EXPECT_EQ(optimal_T(0.5, 1.0, 1.0, 0.0).T, 0u);
    EXPECT_THROW(optimal_T(0.5, 1.0, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(optimal_T(0.0, 1.0, 1.0, 0.5), InvalidArgument);
}

TEST(DeltaT, Cases) {
    EXPECT_EQ(delta_T(0.9, 0.5), 0u);
    EXPECT_EQ(delta_T(0.25, 0.5), 1u);  // alpha = beta^2
    EXPECT_EQ(delta_T(0.3, 0.5), 1u);
    EXPECT_EQ(delta_T(0.0625, 0.5), 3u);
}

TEST(DeltaBound, VanishesToBiasAsAlphaShrinks) {
    const std::vector<double> C{1.0, 2.0};
    const auto rate = rate_constants(0.5, 2, 1);
    const auto tiny = simple_delta_bound(1e-12, C, {0.1, 0.3}, 2.0, rate);
    // delta grows like log(1/alpha), so the excess is O(alpha log(1/alpha)).
    EXPECT_NEAR(tiny.gap, 0.1 * 2.0, 1e-8);
    EXPECT_NEAR(sum_terms(tiny), tiny.gap, 1e-12);
    // Dominates the exact bound at T = delta.
    for (double a : {1e-4, 1e-3, 1e-2, 0.1, 0.9}) {
        const auto d = simple_delta_bound(a, C, {0.1, 0.3}, 2.0, rate);
        const auto exact = markov_bound(a, C, {0.1, 0.3}, 2.0, rate, delta_T(a, rate.beta));
        EXPECT_GE(d.gap, exact.gap - 1e-12) << a;
    }
}

TEST(Verify, InflatedGapPassesAndPinnedTraceFails) {
    RunTrace t;
    for (std::uint64_t k = 0; k <= 10; ++k) t.rows.push_back({k, std::nullopt, 1.0 + 2.0 * 0.1, std::nullopt, 1.0 + 0.2, 0.1});
    t.best_f = 1.2;
    BoundReport r{"test", 0.1, {{"step", 0.1}}, {}};
    EXPECT_FALSE(verify_bound_empirically(t, r, 1.0).pass);
    BoundReport big{"test", 1.0, {{"step", 1.0}}, {}};
    const auto v = verify_bound_empirically(t, big, 1.0);
    EXPECT_TRUE(v.pass);
    EXPECT_NEAR(v.margin, 2.0 + 0.02 - 1.2, 1e-12);
    std::vector<BoundVerdict> vs{v, verify_bound_empirically(t, r, 1.0)};
    EXPECT_DOUBLE_EQ(aggregate(vs).pass_fraction(), 0.5);
}
