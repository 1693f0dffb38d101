#include "incsub/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "incsub/errors.hpp"

namespace incsub {

namespace {

// ceil(x), treating values within rounding distance of an integer as that integer.
double snapped_ceil(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
    return std::ceil(x);
}

void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0)) throw InvalidArgument(std::string(what) + " must be >= 0");
}

void check_bounds(std::span<const double> bounds) {
    if (bounds.empty()) throw InvalidArgument("bound: need at least one C_i");
    for (double c : bounds) {
        require_nonnegative(c, "C_i");
        if (!std::isfinite(c)) throw InvalidArgument("C_i must be finite");
    }
}

void finish(BoundReport& r) {
    r.gap = 0.0;
    for (const auto& t : r.terms) r.gap += t.value;
}

}  // namespace

// ------------------------------------------------------------ chain products

Matrix phi_product(std::span<const TransitionMatrix> matrices) {
    if (matrices.empty()) throw InvalidArgument("phi_product: no matrices");
    const auto m = matrices.front().entries.rows();
    Matrix phi = Matrix::Identity(m, m);
    for (const auto& p : matrices) {
        if (p.entries.rows() != m || p.entries.cols() != m)
            throw DimensionMismatch(static_cast<std::size_t>(m), static_cast<std::size_t>(p.entries.rows()));
        phi = phi * p.entries;
    }
    return phi;
}

double max_deviation_from_uniform(const Matrix& phi) {
    const double u = 1.0 / static_cast<double>(phi.rows());
    return (phi.array() - u).abs().maxCoeff();
}

double RateConstants::envelope(std::uint64_t span) const {
    if (beta == 0.0) return span == 0 ? b : 0.0;
    return b * std::pow(beta, static_cast<double>(span));
}

RateConstants rate_constants(double eta, std::size_t m, std::size_t window) {
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("rate constants: eta must lie in (0, 1]");
    if (m == 0) throw InvalidArgument("rate constants: m must be >= 1");
    if (window == 0) throw InvalidArgument("rate constants: Q must be >= 1");
    const double md = static_cast<double>(m);
    const double base = 1.0 - eta / (4.0 * md * md);
    return RateConstants{std::pow(base, -2.0), std::pow(base, 1.0 / static_cast<double>(window)), eta, m, window};
}

RateConstants uniform_chain_rates(std::size_t m) { return RateConstants{1.0, 0.0, 1.0 / static_cast<double>(m), m, 1}; }

// --------------------------------------------------------------- bounds

double BoundReport::term(const std::string& name) const {
    for (const auto& t : terms)
        if (t.name == name) return t.value;
    return 0.0;
}

BoundReport cyclic_bound(double alpha, std::span<const double> bounds, ErrorMoments moments, double diameter) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("cyclic bound: alpha must be > 0");
    check_bounds(bounds);
    require_nonnegative(moments.mu, "mu");
    require_nonnegative(moments.nu, "nu");
    require_nonnegative(diameter, "diameter");
    if (moments.mu > 0.0 && !std::isfinite(diameter))
        throw InvalidArgument("cyclic bound: biased errors need a bounded feasible set");

    const double m = static_cast<double>(bounds.size());
    const double sum_c = std::accumulate(bounds.begin(), bounds.end(), 0.0);
    const double spread = sum_c + m * moments.nu;

    BoundReport r;
    r.theorem = moments.mu > 0.0 ? "cyclic_biased" : "cyclic_zero_mean";
    r.terms.push_back({"bias", moments.mu > 0.0 ? m * moments.mu * diameter : 0.0});
    r.terms.push_back({"step", 0.5 * alpha * spread * spread});
    r.parameters = {{"alpha", alpha}, {"m", m},   {"sum_C", sum_c},
                    {"mu", moments.mu}, {"nu", moments.nu}, {"diameter", diameter}};
    finish(r);
    return r;
}

BoundReport markov_bound(double alpha, std::span<const double> bounds, ErrorMoments moments, double diameter,
                         const RateConstants& rate, std::int64_t T) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("markov bound: alpha must be > 0");
    if (T < 0) throw InvalidArgument("markov bound: T must be >= 0");
    check_bounds(bounds);
    require_nonnegative(moments.mu, "mu");
    require_nonnegative(moments.nu, "nu");
    if (!(diameter >= 0.0) || !std::isfinite(diameter))
        throw InvalidArgument("markov bound: feasible set must be bounded");

    const double c = *std::max_element(bounds.begin(), bounds.end());
    const double sum_c = std::accumulate(bounds.begin(), bounds.end(), 0.0);
    const double t = static_cast<double>(T);
    const double mixing = rate.beta == 0.0 ? 0.0 : rate.b * sum_c * std::pow(rate.beta, t + 1.0) * diameter;

    BoundReport r;
    r.theorem = "markov";
    r.terms.push_back({"bias", moments.mu * diameter});
    r.terms.push_back({"step", 0.5 * alpha * (moments.nu + c) * (moments.nu + c)});
    r.terms.push_back({"window", alpha * t * c * (c + moments.nu)});
    r.terms.push_back({"mixing", mixing});
    r.parameters = {{"alpha", alpha}, {"m", static_cast<double>(bounds.size())},
                    {"C", c},         {"sum_C", sum_c},
                    {"mu", moments.mu}, {"nu", moments.nu},
                    {"diameter", diameter}, {"b", rate.b},
                    {"beta", rate.beta}, {"T", t}};
    finish(r);
    return r;
}

double markov_T_terms(double alpha, double C, double C0, double beta, double nu, std::uint64_t T) {
    const double t = static_cast<double>(T);
    const double mixing = beta == 0.0 ? 0.0 : C0 * std::pow(beta, t + 1.0);
    return alpha * t * C * (C + nu) + mixing;
}

OptimalT optimal_T(double alpha, double C, double C0, double beta, double nu) {
    if (!(alpha > 0.0)) throw InvalidArgument("optimal T: alpha must be > 0");
    if (!(C > 0.0)) throw InvalidArgument("optimal T: C must be > 0");
    if (!(C0 > 0.0)) throw InvalidArgument("optimal T: C0 must be > 0");
    require_nonnegative(nu, "nu");
    if (beta == 0.0) return {};
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("optimal T: beta must lie in (0, 1)");

    OptimalT out;
    const double ratio = alpha * C * (C + nu) / (C0 * -std::log(beta));
    if (ratio >= 1.0) {
        out.formula_T = 0;
    } else {
        out.formula_T = static_cast<std::int64_t>(snapped_ceil(std::log(ratio) / std::log(beta))) - 1;
    }
    out.clamped = out.formula_T < 0;
    const auto start = static_cast<std::uint64_t>(std::max<std::int64_t>(out.formula_T, 0));

    // The objective is convex in T, so a local walk reaches the integer minimizer.
    auto g = [&](std::uint64_t T) { return markov_T_terms(alpha, C, C0, beta, nu, T); };
    std::uint64_t T = start;
    while (g(T + 1) < g(T)) ++T;
    while (T > 0 && g(T - 1) <= g(T)) --T;
    out.T = T;
    out.formula_discrepancy = T != start;
    return out;
}

std::uint64_t delta_T(double alpha, double beta) {
    if (!(alpha > 0.0)) throw InvalidArgument("delta: alpha must be > 0");
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("delta: beta must lie in (0, 1)");
    if (alpha >= beta) return 0;
    return static_cast<std::uint64_t>(snapped_ceil(std::log(alpha) / std::log(beta))) - 1;
}

BoundReport simple_delta_bound(double alpha, std::span<const double> bounds, ErrorMoments moments,
                               double diameter, const RateConstants& rate) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("delta bound: alpha must be > 0");
    check_bounds(bounds);
    require_nonnegative(moments.mu, "mu");
    require_nonnegative(moments.nu, "nu");
    if (!(diameter >= 0.0) || !std::isfinite(diameter))
        throw InvalidArgument("delta bound: feasible set must be bounded");

    const std::uint64_t delta = rate.beta == 0.0 ? 0 : delta_T(alpha, rate.beta);
    const double c = *std::max_element(bounds.begin(), bounds.end());
    const double sum_c = std::accumulate(bounds.begin(), bounds.end(), 0.0);
    const double d = static_cast<double>(delta);

    BoundReport r;
    r.theorem = "markov_delta";
    r.terms.push_back({"bias", moments.mu * diameter});
    r.terms.push_back({"step", 0.5 * alpha * (moments.nu + c) * (moments.nu + c)});
    r.terms.push_back({"window", alpha * c * (c + moments.nu) * d});
    r.terms.push_back({"mixing", rate.beta == 0.0 ? 0.0 : alpha * rate.b * sum_c * diameter});
    r.parameters = {{"alpha", alpha}, {"m", static_cast<double>(bounds.size())},
                    {"C", c},         {"sum_C", sum_c},
                    {"mu", moments.mu}, {"nu", moments.nu},
                    {"diameter", diameter}, {"b", rate.b},
                    {"beta", rate.beta}, {"T", d}};
    finish(r);
    return r;
}

// -------------------------------------------------------- empirical checks

double observed_inf(const RunTrace& trace, std::uint64_t burn_in) {
    if (burn_in == 0) return trace.best_f;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : trace.rows)
        if (row.k >= burn_in) best = std::min(best, row.f);
    return best;
}

BoundVerdict verify_bound_empirically(const RunTrace& trace, const BoundReport& report, double f_star,
                                      const VerifyOptions& options) {
    BoundVerdict v;
    v.observed_inf = observed_inf(trace, options.burn_in);
    v.threshold = f_star + report.gap * (1.0 + options.relative_slack) + options.absolute_slack;
    v.margin = v.threshold - v.observed_inf;
    v.pass = v.observed_inf <= v.threshold;
    return v;
}

VerdictSummary aggregate(std::span<const BoundVerdict> verdicts) {
    VerdictSummary s;
    s.total = verdicts.size();
    for (const auto& v : verdicts) s.passed += v.pass ? 1 : 0;
    return s;
}

}  // namespace incsub
