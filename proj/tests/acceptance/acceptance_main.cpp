// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "incsub/analysis.hpp"
#include "incsub/config.hpp"
#include "incsub/cyclic.hpp"
#include "incsub/harness.hpp"
#include "incsub/markov.hpp"
#include "incsub/random.hpp"

using namespace incsub;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 20;

const fs::path kOut = fs::current_path() / "acceptance_out";

const char* kFixture = R"(problem.fixture = quadratic
problem.m = 5
problem.seed = 7
problem.spread = 1
set.kind = box
set.lower = -0.5,-0.5
set.upper = 1,1
noise.kind = gaussian
noise.nu = 0.5
run.reps = 20
)";

struct Named {
    std::string name;
    std::string text;
};

std::string cfg(const std::string& extra) { return std::string(kFixture) + extra; }

// Configurations shared by the convergence criteria and the determinism rerun.
const std::vector<Named>& configs() {
    static const std::vector<Named> all{
        {"c1_cyclic_harmonic", cfg("algorithm = cyclic\nschedule.kind = powerlaw\nschedule.a = 1\nschedule.p = 1\n"
                                   "run.horizon = 100000\nrun.stride = 1000\n")},
        {"c2_cyclic_constant", cfg("algorithm = cyclic\nschedule.kind = constant\nschedule.alpha = 0.01\n"
                                   "run.horizon = 100000\nrun.stride = 1000\nverify.relative_slack = 0\n")},
        {"c4_markov_powerlaw", cfg("algorithm = markov\ntopology.kind = static\ntopology.graph = ring:5\n"
                                   "scheme.kind = equal\nschedule.kind = powerlaw\nschedule.a = 1\nschedule.p = 0.8\n"
                                   "run.horizon = 1000000\nrun.stride = 10000\nrun.tail_fraction = 0.1\n")},
        {"c5_markov_constant", cfg("algorithm = markov\ntopology.kind = static\ntopology.graph = ring:5\n"
                                   "scheme.kind = equal\nschedule.kind = constant\nschedule.alpha = 0.005\n"
                                   "run.horizon = 100000\nrun.stride = 1000\nverify.relative_slack = 0\n")},
    };
    return all;
}

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct HarnessRun {
    Experiment experiment;
    ExperimentResult result;
};

HarnessRun run_named(const Named& n, const fs::path& dir, std::uint64_t jobs = 1) {
    auto c = parse_config(n.text);
    c.run.jobs = jobs;
    Experiment e = build_experiment(c);
    ExperimentResult r = run_experiment(e, dir);
    return {std::move(e), std::move(r)};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- criteria

Outcome cyclic_convergence() {
    const auto run = run_named(configs()[0], kOut / "run1" / configs()[0].name);
    const double f_star = run.experiment.problem.optimum.f_star;
    int ok = 0;
    double worst = 0;
    for (const auto& rep : run.result.replications) {
        const double gap = rep.trace.final_f - f_star;
        ok += gap <= 1e-2;
        worst = std::max(worst, gap);
    }
    return {ok >= 19, fmt("final gap <= 1e-2 in %d/%d seeds after 1e5 cycles (worst %.3g)", ok, kSeeds, worst)};
}

Outcome cyclic_constant_bound() {
    const auto run = run_named(configs()[1], kOut / "run1" / configs()[1].name);
    const auto& e = run.experiment;
    const auto& bound = run.result.bounds.bounds.at(0).report;
    int ok = 0;
    for (const auto& rep : run.result.replications) ok += rep.verdicts.at(0).pass;

    // Error-free companion run against (alpha/2)(sum C_i)^2.
    const auto clean = run_cyclic(e.problem, NoiseModel::none(), e.schedule, e.x0, 100000, 0, RunOptions{100000, 0.1, false});
    const auto clean_bound = cyclic_bound(0.01, e.problem.bounds(), {}, e.problem.set.diameter());
    const double clean_gap = clean.best_f - e.problem.optimum.f_star;
    const bool clean_ok = clean_gap <= clean_bound.gap;
    return {ok == kSeeds && clean_ok,
            fmt("noisy: inf gap within %.4g in %d/%d seeds; error-free inf gap %.3g <= %.4g: %s", bound.gap, ok, kSeeds,
                clean_gap, clean_bound.gap, clean_ok ? "yes" : "no")};
}

Graph matching(std::size_t m, std::size_t offset) {
    Graph g(m);
    for (std::size_t i = offset; i + 1 < m + offset; i += 2) g.add_edge(i % m, (i + 1) % m);
    return g;
}

Outcome envelope() {
    struct Case {
        std::string name;
        TopologySequence topo;
        std::vector<double> weights;
    };
    std::vector<Case> cases{{"ring m=4", make_topology(StaticTopology{Graph::ring(4)}), {0.3, 0.5, 0.7, 0.4}},
                            {"path m=5", make_topology(StaticTopology{Graph::path(5)}), {0.2, 0.6, 0.5, 0.8, 0.35}},
                            {"matchings m=4 Q=2", make_topology(PeriodicTopology{{matching(4, 0), matching(4, 1)}}),
                             {0.45, 0.25, 0.6, 0.5}}};
    int checked = 0, violations = 0;
    double tightest = 1e300;
    for (const auto& c : cases) {
        for (const auto& scheme : {Scheme::equal_probability(), Scheme::min_equal_neighbor(),
                                   Scheme::weighted_metropolis_hastings(c.weights)}) {
            const auto rate = rate_constants(topology_eta(scheme, c.topo), c.topo.agents(), c.topo.window());
            const auto m = static_cast<Eigen::Index>(c.topo.agents());
            Matrix phi = Matrix::Identity(m, m);
            for (std::uint64_t k = 0; k <= 200; ++k) {
                phi = phi * build_transition(scheme, c.topo.graph_at(k)).entries;
                const double dev = max_deviation_from_uniform(phi);
                const double env = rate.envelope(k);
                ++checked;
                if (dev > env + 1e-10) ++violations;
                tightest = std::min(tightest, env - dev);
            }
        }
    }
    return {violations == 0, fmt("%d (scheme, topology, k) checks, %d above b*beta^k, min slack %.3g", checked,
                                 violations, tightest)};
}

Outcome markov_convergence() {
    const auto run = run_named(configs()[2], kOut / "run1" / configs()[2].name);
    const double f_star = run.experiment.problem.optimum.f_star;
    int ok = 0;
    double worst = 0;
    for (const auto& rep : run.result.replications) {
        const double gap = rep.trace.tail_min_f - f_star;
        ok += gap <= 1e-2;
        worst = std::max(worst, gap);
    }
    return {ok >= 19, fmt("tail-min gap (last 10%% of 1e6 ticks) <= 1e-2 in %d/%d seeds (worst %.3g)", ok, kSeeds, worst)};
}

Outcome markov_constant_bound() {
    const auto run = run_named(configs()[3], kOut / "run1" / configs()[3].name);
    const auto& b = run.result.bounds;
    std::string detail;
    bool all = true;
    for (std::size_t i = 0; i < b.bounds.size(); ++i) {
        int ok = 0;
        for (const auto& rep : run.result.replications) ok += rep.verdicts.at(i).pass;
        all = all && ok >= 19;
        detail += fmt("%s(T=%llu, gap %.4g) %d/%d; ", b.bounds[i].label.c_str(),
                      static_cast<unsigned long long>(*b.bounds[i].T), b.bounds[i].report.gap, ok, kSeeds);
    }
    const auto& e = run.experiment;
    const auto& rate = *b.rate;
    const double star = b.bounds.at(1).report.gap;
    std::uint64_t worse = 0;
    for (std::int64_t T = 0; T <= 2000; ++T)
        if (markov_bound(0.005, e.problem.bounds(), b.moments, b.diameter, rate, T).gap < star) ++worse;
    all = all && worse == 0;
    detail += fmt("gap(T*) beaten by %llu of T in [0,2000]", static_cast<unsigned long long>(worse));
    return {all, detail};
}

Outcome optimal_T_correct() {
    RandomStream rng(2024, StreamTag::Fixture, 6);
    int match = 0, formula_match = 0, clamped = 0;
    const int N = 1000;
    for (int t = 0; t < N; ++t) {
        const double alpha = std::pow(10.0, -4.0 + 4.0 * rng.uniform());
        const double C = 0.1 + 4.9 * rng.uniform(), C0 = 0.1 + 49.9 * rng.uniform();
        const double beta = 0.3 + 0.69 * rng.uniform();
        // Past H the beta-term is below 1e-15 while the T-term keeps growing.
        const auto H = static_cast<std::uint64_t>(std::ceil(std::log(1e-15 / C0) / std::log(beta))) + 1;
        std::uint64_t best = 0;
        double best_v = C0 * beta;
        for (std::uint64_t T = 1; T <= H; ++T) {
            const double v = alpha * double(T) * C * C + C0 * std::pow(beta, double(T + 1));
            if (v < best_v) best = T, best_v = v;
        }
        const auto o = optimal_T(alpha, C, C0, beta);
        match += o.T == best;
        clamped += o.clamped;
        formula_match += static_cast<std::uint64_t>(std::max<std::int64_t>(o.formula_T, 0)) == best;
    }
    return {match == N, fmt("optimal_T equals brute force in %d/%d tuples (closed form alone: %d/%d, clamped %d)", match, N,
                            formula_match, N, clamped)};
}

Outcome scheme_validity() {
    RandomStream rng(77, StreamTag::Topology, 7);
    int ok = 0, total = 0;
    std::string first_failure;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t m = 2 + rng.below(11);
        const double p = 0.1 + 0.8 * rng.uniform();
        Graph g(m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                if (rng.uniform() < p) g.add_edge(i, j);
        std::vector<double> w(m);
        for (auto& x : w) x = 0.01 + 0.98 * rng.uniform();
        for (const auto& scheme : {Scheme::equal_probability(), Scheme::min_equal_neighbor(),
                                   Scheme::weighted_metropolis_hastings(w)}) {
            ++total;
            const auto c = check_transition(build_transition(scheme, g), g, scheme, 1e-12);
            if (c.ok()) {
                ++ok;
            } else if (first_failure.empty()) {
                first_failure = std::string(to_string(scheme.kind)) + " on " + g.describe() + ": " + c.detail;
            }
        }
    }
    return {ok == total, fmt("%d/%d matrices pass all checks", ok, total) + (first_failure.empty() ? "" : "; " + first_failure)};
}

Outcome oracle_agreement() {
    struct Fixture {
        std::string name;
        ProblemInstance problem;
    };
    RegressionSpec constrained;
    constrained.locations = {-1.0, 0.0, 1.0};
    constrained.basis.powers = {0, 1};
    constrained.samples = {{0.0, 0.2}, {2.0, 1.6}, {4.0, 4.4}};
    RegressionSpec deficient;
    deficient.locations = {0.5, 0.5, 0.5};
    deficient.basis.powers = {0, 1};
    deficient.samples = {{1.0, 2.0}, {1.4}, {0.2, 0.9}};
    std::vector<Fixture> fixtures{
        {"allocation log/sqrt/2x", make_allocation({{UtilityKind::Log1p, 1.0}, {UtilityKind::Sqrt, 1.0},
                                                    {UtilityKind::Linear, 2.0}},
                                                   FeasibleSet::simplex(3, 1.0))},
        {"allocation log/log", make_allocation({{UtilityKind::Log1p, 1.0}, {UtilityKind::Log1p, 1.0}},
                                               FeasibleSet::simplex(2, 1.0))},
        {"regression constrained", make_regression(constrained, FeasibleSet::box(2, -1, 1))},
        {"regression rank-deficient", make_regression(deficient, FeasibleSet::box(2, 0, 1))},
    };
    std::string detail;
    bool all = true;
    for (const auto& f : fixtures) {
        const auto& p = f.problem;
        if (p.optimum.method != CertificateMethod::GridSearch) {
            all = false;
            detail += f.name + " not grid-certified; ";
            continue;
        }
        const std::size_t m = p.agents();
        const Graph g = m == 2 ? Graph::path(2) : Graph::ring(m);
        const RunOptions opts{100000, 0.1, false};
        const DecisionPoint x0(p.set.project(Vector::Zero(static_cast<Eigen::Index>(p.dim()))));
        const auto cyc = run_cyclic(p, NoiseModel::none(), StepSchedule::power_law(1.0, 1.0), x0, 100000, 1, opts);
        const auto mar = run_markov(p, NoiseModel::none(), StepSchedule::power_law(1.0, 0.8), make_topology(StaticTopology{g}),
                                    Scheme::min_equal_neighbor(), x0, InitialAgentPolicy::uniform(), 200000, 1, opts);
        const double gc = cyc.best_f - p.optimum.f_star, gm = mar.best_f - p.optimum.f_star;
        const bool ok = std::abs(gc) <= 5e-3 && std::abs(gm) <= 5e-3;
        all = all && ok;
        detail += fmt("%s cyclic %.2g markov %.2g; ", f.name.c_str(), gc, gm);
    }
    return {all, detail};
}

Outcome determinism() {
    int compared = 0, differing = 0;
    std::string first;
    for (const auto& n : configs()) {
        // Rerun serially, then with four workers; compare against the first run.
        for (std::uint64_t jobs : {1u, 4u}) {
            const auto dir = kOut / ("run_jobs" + std::to_string(jobs)) / n.name;
            run_named(n, dir, jobs);
            for (const auto& entry : fs::directory_iterator(kOut / "run1" / n.name)) {
                const auto other = dir / entry.path().filename();
                ++compared;
                if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) {
                    ++differing;
                    if (first.empty()) first = other.string();
                }
            }
        }
    }
    return {differing == 0 && compared > 0,
            fmt("%d files compared across reruns (serial and 4 jobs), %d differ", compared, differing) +
                (first.empty() ? "" : " first: " + first)};
}

}  // namespace

int main() {
    fs::remove_all(kOut);
    fs::create_directories(kOut);
    report(1, "cyclic convergence, alpha_k = 1/k", cyclic_convergence);
    report(2, "cyclic constant-step bound", cyclic_constant_bound);
    report(3, "geometric envelope of chain products", envelope);
    report(4, "markov convergence, alpha_k = k^-0.8", markov_convergence);
    report(5, "markov constant-step bound", markov_constant_bound);
    report(6, "optimal T versus brute force", optimal_T_correct);
    report(7, "scheme validity on random topologies", scheme_validity);
    report(8, "oracle agreement on grid-certified fixtures", oracle_agreement);
    report(9, "byte-identical reruns", determinism);
    std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
