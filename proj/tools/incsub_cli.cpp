#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "incsub/errors.hpp"
#include "incsub/harness.hpp"

namespace {

enum Exit { kOk = 0, kVerificationFailed = 1, kUsage = 2, kAborted = 3 };

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed, reps, stride, jobs;
    std::optional<std::string> out;
    bool assert_bounds = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "experiment config (key = value, or JSON)")->required();
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--reps", o.reps, "replications")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--stride", o.stride, "trace thinning stride")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", o.jobs, "parallel replications")->check(CLI::PositiveNumber);
    cmd->add_flag("--assert-bounds", o.assert_bounds, "nonzero exit when a bound check fails");
}

incsub::ExperimentConfig load(const Overrides& o) {
    auto c = incsub::load_config(o.config);
    if (o.seed) c.run.seed = *o.seed;
    if (o.reps) c.run.reps = *o.reps;
    if (o.stride) c.run.stride = *o.stride;
    if (o.jobs) c.run.jobs = *o.jobs;
    if (o.out) c.run.out = *o.out;
    if (o.assert_bounds) c.verify.assert_bounds = true;
    return c;
}

std::filesystem::path out_dir(const incsub::ExperimentConfig& c) {
    return c.run.out.empty() ? incsub::default_output_dir() : std::filesystem::path(c.run.out);
}

void print_bounds(const incsub::BoundsResult& b) {
    if (b.rate)
        std::printf("rate constants: b=%.10g beta=%.10g eta=%.10g Q=%zu\n", b.rate->b, b.rate->beta, b.rate->eta,
                    b.rate->window);
    if (b.optimal && b.rate && b.rate->beta > 0.0)
        std::printf("optimal T=%llu (closed form %lld%s%s)\n", static_cast<unsigned long long>(b.optimal->T),
                    static_cast<long long>(b.optimal->formula_T), b.optimal->clamped ? ", clamped" : "",
                    b.optimal->formula_discrepancy ? ", differs from integer minimizer" : "");
    for (const auto& lb : b.bounds) {
        std::printf("%-8s gap=%.10g", lb.label.c_str(), lb.report.gap);
        for (const auto& t : lb.report.terms) std::printf("  %s=%.6g", t.name.c_str(), t.value);
        std::printf("\n");
    }
    for (const auto& n : b.notes) std::printf("note: %s\n", n.c_str());
}

int cmd_run(const Overrides& o) {
    const auto config = load(o);
    const auto experiment = incsub::build_experiment(config);
    const auto dir = out_dir(config);
    const auto result = incsub::run_experiment(experiment, dir);
    const double f_star = experiment.problem.optimum.f_star;
    for (const auto& rep : result.replications) {
        std::printf("rep %llu seed %llu: final gap %.6g, tail-min gap %.6g%s\n",
                    static_cast<unsigned long long>(rep.index), static_cast<unsigned long long>(rep.seed),
                    rep.trace.final_f - f_star, rep.trace.tail_min_f - f_star, rep.trace.aborted ? " (aborted)" : "");
        if (rep.trace.aborted) std::fprintf(stderr, "rep %llu: %s\n", static_cast<unsigned long long>(rep.index),
                                            rep.trace.diagnostic.c_str());
    }
    print_bounds(result.bounds);
    std::printf("outputs in %s\n", dir.string().c_str());
    if (result.aborted) return kAborted;
    if (config.verify.assert_bounds && !result.bounds_hold()) {
        std::fprintf(stderr, "bound verification failed\n");
        return kVerificationFailed;
    }
    return kOk;
}

int cmd_validate(const Overrides& o) {
    const auto config = load(o);
    const auto e = incsub::build_experiment(config);
    std::printf("problem %s: m=%zu n=%zu set=%s f*=%.10g (%s)\n", e.problem.name.c_str(), e.problem.agents(),
                e.problem.dim(), e.problem.set.kind_name(), e.problem.optimum.f_star,
                incsub::to_string(e.problem.optimum.method));
    if (e.topology) {
        std::printf("topology: window Q=%zu, max degree %zu\n", e.topology->window(), e.topology->max_degree());
        std::printf("scheme %s: eta=%.10g\n", incsub::to_string(e.scheme->kind),
                    incsub::topology_eta(*e.scheme, *e.topology));
        std::printf("transition matrices: doubly stochastic, positive diagonal, eta floor, sparsity ok\n");
    }
    std::printf("valid\n");
    return kOk;
}

int cmd_bounds(const Overrides& o) {
    const auto config = load(o);
    const auto e = incsub::build_experiment(config);
    const auto b = incsub::compute_bounds(e);
    print_bounds(b);
    const auto dir = out_dir(config);
    std::filesystem::create_directories(dir);
    incsub::write_atomically(dir / "bounds.csv", incsub::bounds_csv(b));
    return kOk;
}

int cmd_compare(const Overrides& o) {
    const auto config = load(o);
    const auto e = incsub::build_experiment(config);
    const auto cells = incsub::compare_bounds(e);
    const auto dir = out_dir(config);
    std::filesystem::create_directories(dir);
    incsub::write_atomically(dir / "compare.csv", incsub::compare_csv(cells));
    std::fputs(incsub::compare_csv(cells).c_str(), stdout);
    if (config.verify.assert_bounds)
        for (const auto& c : cells)
            if (c.pass_fraction < 1.0) return kVerificationFailed;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incremental stochastic subgradient experiments"};
    app.require_subcommand(1);
    Overrides o;
    auto* run = app.add_subcommand("run", "run seeded replications and verify bounds");
    auto* validate = app.add_subcommand("validate", "check topology, scheme and problem assumptions");
    auto* bounds = app.add_subcommand("bounds", "analytic bounds without simulation");
    auto* compare = app.add_subcommand("compare", "analytic vs empirical gaps over a step-size grid");
    for (auto* cmd : {run, validate, bounds, compare}) add_common(cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (validate->parsed()) return cmd_validate(o);
        if (bounds->parsed()) return cmd_bounds(o);
        return cmd_compare(o);
    } catch (const incsub::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const incsub::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kUsage;
    } catch (const incsub::NonFiniteIterate& e) {
        std::fprintf(stderr, "aborted: %s\n", e.what());
        return kAborted;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kAborted;
    }
}
