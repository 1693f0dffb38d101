#include "incsub/harness.hpp"

#include "json.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "incsub/cyclic.hpp"
#include "incsub/errors.hpp"

namespace incsub {

namespace {

Vector to_eigen(const std::vector<double>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

std::size_t parse_index(const std::string& field, const std::string& text) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError(field, "expected an integer, got '" + text + "'");
    }
    if (pos != text.size() || text.front() == '-') throw ConfigError(field, "expected an integer, got '" + text + "'");
    return static_cast<std::size_t>(v);
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

// Rethrows constructor rejections as config errors naming the section.
template <class F>
auto in_section(const std::string& field, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw ConfigError(field, e.what());
    } catch (const DimensionMismatch& e) {
        throw ConfigError(field, e.what());
    }
}

}  // namespace

FeasibleSet build_set(const SetSpec& s) {
    return in_section("set", [&] {
        if (s.kind == "box") return FeasibleSet::box(to_eigen(s.lower), to_eigen(s.upper));
        if (s.kind == "ball") return FeasibleSet::ball(to_eigen(s.center), s.radius);
        if (s.kind == "simplex") return FeasibleSet::simplex(s.dim, s.scale);
        if (s.kind == "halfspaces") {
            std::vector<Halfspace> hs;
            for (const auto& row : s.halfspaces) {
                std::vector<double> normal(row.begin(), row.end() - 1);
                hs.push_back(Halfspace{to_eigen(normal), row.back()});
            }
            return FeasibleSet::halfspaces(std::move(hs));
        }
        throw ConfigError("set.kind", "unknown set '" + s.kind + "'");
    });
}

ProblemInstance build_problem(const ProblemSpec& p) {
    const FeasibleSet set = build_set(p.set);
    return in_section("problem", [&] {
        if (p.fixture == "quadratic") {
            if (!p.centers.empty()) {
                std::vector<Vector> centers;
                for (const auto& c : p.centers) centers.push_back(to_eigen(c));
                return make_quadratic(centers, set);
            }
            return make_quadratic_suite(p.m, set.dim(), p.spread, set, p.seed);
        }
        if (p.fixture == "regression") {
            RegressionSpec spec;
            spec.locations = p.locations;
            spec.basis.powers = p.powers;
            spec.samples = p.samples;
            spec.true_x = to_eigen(p.true_x);
            spec.noise_sigma = p.noise_sigma;
            spec.noise_seed = p.seed;
            spec.samples_per_agent = p.samples_per_agent;
            spec.grid_resolution = p.grid_resolution;
            return make_regression(spec, set);
        }
        if (p.fixture == "allocation") return make_allocation(p.utilities, set, p.grid_resolution);
        throw ConfigError("problem.fixture", "unknown fixture '" + p.fixture + "'");
    });
}

StepSchedule build_schedule(const ScheduleSpec& s) {
    return in_section("schedule", [&] {
        if (s.kind == "constant") return StepSchedule::constant(s.alpha);
        return StepSchedule::power_law(s.a, s.p);
    });
}

NoiseModel build_noise(const NoiseSpec& s, std::size_t n) {
    return in_section("noise", [&] {
        if (s.kind == "none") return NoiseModel::none();
        if (s.kind == "gaussian") {
            const double sigma = s.nu ? *s.nu / std::sqrt(static_cast<double>(n)) : s.sigma;
            return NoiseModel::gaussian({sigma, s.sigma_decay});
        }
        if (s.kind == "biased")
            return NoiseModel::biased_gaussian({s.bias, s.bias_decay}, {s.sigma, s.sigma_decay}, to_eigen(s.direction));
        return NoiseModel::bounded_uniform({s.radius, s.radius_decay});
    });
}

Scheme build_scheme(const SchemeSpec& s) {
    if (s.kind == "equal") return Scheme::equal_probability();
    if (s.kind == "min_equal") return Scheme::min_equal_neighbor();
    return Scheme::weighted_metropolis_hastings(s.weights);
}

Graph parse_graph(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("topology.graph", "expected kind:m, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    if (kind == "edges") {
        const auto c2 = rest.find(':');
        const std::size_t m = parse_index("topology.graph", rest.substr(0, c2));
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        if (c2 != std::string::npos) {
            std::stringstream ss(rest.substr(c2 + 1));
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (item.empty()) continue;
                const auto dash = item.find('-');
                if (dash == std::string::npos) throw ConfigError("topology.graph", "edge '" + item + "' is not i-j");
                const std::size_t i = parse_index("topology.graph", item.substr(0, dash));
                const std::size_t j = parse_index("topology.graph", item.substr(dash + 1));
                if (i == 0 || j == 0) throw ConfigError("topology.graph", "agents are 1-based");
                edges.emplace_back(i - 1, j - 1);
            }
        }
        return in_section("topology.graph", [&] { return Graph::from_edges(m, edges); });
    }
    const std::size_t m = parse_index("topology.graph", rest);
    return in_section("topology.graph", [&] {
        if (kind == "ring") return Graph::ring(m);
        if (kind == "path") return Graph::path(m);
        if (kind == "complete") return Graph::complete(m);
        if (kind == "star") return Graph::star(m);
        throw ConfigError("topology.graph", "unknown graph kind '" + kind + "'");
    });
}

TopologySequence build_topology(const TopologySpec& t) {
    TopologyKind kind;
    if (t.kind == "static") {
        kind = StaticTopology{parse_graph(t.graph)};
    } else if (t.kind == "periodic") {
        std::vector<Graph> graphs;
        for (const auto& g : t.graphs) graphs.push_back(parse_graph(g));
        kind = PeriodicTopology{std::move(graphs)};
    } else {
        kind = RandomEdgeTopology{parse_graph(t.graph), t.inclusion, t.window, t.seed};
    }
    return in_section("topology", [&] { return make_topology(std::move(kind)); });
}

Experiment build_experiment(const ExperimentConfig& config) {
    ProblemInstance problem = build_problem(config.problem);
    const std::size_t n = problem.dim();
    Experiment e{config, std::move(problem), build_noise(config.noise, n), build_schedule(config.schedule),
                 std::nullopt, std::nullopt, DecisionPoint{}, InitialAgentPolicy::uniform()};

    if (config.run.x0.empty()) {
        e.x0 = DecisionPoint(e.problem.set.project(Vector::Zero(static_cast<Eigen::Index>(n))));
    } else {
        if (config.run.x0.size() != n)
            throw ConfigError("run.x0", "expected " + std::to_string(n) + " coordinates, got " +
                                            std::to_string(config.run.x0.size()));
        e.x0 = DecisionPoint(to_eigen(config.run.x0));
    }

    if (config.algorithm == Algorithm::Markov) {
        e.topology = build_topology(config.topology);
        if (e.topology->agents() != e.problem.agents())
            throw ConfigError("topology.graph", "topology has " + std::to_string(e.topology->agents()) +
                                                    " agents, problem has " + std::to_string(e.problem.agents()));
        e.scheme = build_scheme(config.scheme);
        if (config.run.s0 != "uniform") {
            const std::size_t s0 = parse_index("run.s0", config.run.s0);
            if (s0 == 0 || s0 > e.problem.agents()) throw ConfigError("run.s0", "agent index out of range");
            e.policy = InitialAgentPolicy::at(s0 - 1);
        }
        try {
            validate_markov_setup(*e.topology, *e.scheme, config.run.horizon);
        } catch (const InvalidArgument& err) {
            throw ConfigError("scheme", err.what());
        }
    }
    return e;
}

// ------------------------------------------------------------------ bounds

RateConstants experiment_rates(const Experiment& e) {
    const auto& topo = *e.topology;
    const std::size_t m = topo.agents();
    if (const auto* st = std::get_if<StaticTopology>(&topo.kind())) {
        const TransitionMatrix p = build_transition(*e.scheme, st->graph);
        const Matrix uniform = Matrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m),
                                                1.0 / static_cast<double>(m));
        if ((p.entries - uniform).cwiseAbs().maxCoeff() <= 1e-15) return uniform_chain_rates(m);
    }
    return rate_constants(topology_eta(*e.scheme, topo), m, topo.window());
}

BoundsResult compute_bounds(const Experiment& e, std::optional<double> alpha) {
    BoundsResult out;
    const std::size_t n = e.problem.dim();
    out.moments = ErrorMoments{e.noise.sup_mu(n), e.noise.sup_nu(n)};
    out.diameter = e.problem.set.diameter();
    const bool markov = e.config.algorithm == Algorithm::Markov;
    if (markov) out.rate = experiment_rates(e);

    if (!alpha) {
        if (!e.schedule.is_constant()) {
            out.notes.push_back("diminishing step: no constant-step bound");
            return out;
        }
        alpha = std::get<ConstantStep>(e.schedule.kind()).alpha;
    }
    if (!(*alpha > 0.0)) {
        out.notes.push_back("step size 0: no bound");
        return out;
    }
    const std::vector<double> C = e.problem.bounds();

    if (!markov) {
        if (out.moments.mu > 0.0 && !std::isfinite(out.diameter)) {
            out.notes.push_back("biased errors on an unbounded set: bias term is infinite");
            return out;
        }
        out.bounds.push_back({"cyclic", std::nullopt, cyclic_bound(*alpha, C, out.moments, out.diameter)});
        return out;
    }

    if (!std::isfinite(out.diameter)) {
        out.notes.push_back("markov bounds need a bounded feasible set");
        return out;
    }
    const RateConstants& rate = *out.rate;
    double sumC = 0.0, maxC = 0.0;
    for (double c : C) {
        sumC += c;
        maxC = std::max(maxC, c);
    }
    std::vector<std::pair<std::string, std::uint64_t>> Ts{{"T=0", 0}};
    const double C0 = rate.b * sumC * out.diameter;
    if (rate.beta > 0.0 && C0 > 0.0 && maxC > 0.0) {
        out.optimal = optimal_T(*alpha, maxC, C0, rate.beta, out.moments.nu);
        Ts.emplace_back("T*", out.optimal->T);
        Ts.emplace_back("delta", delta_T(*alpha, rate.beta));
    } else {
        out.optimal = OptimalT{};
        Ts.emplace_back("T*", 0);
        Ts.emplace_back("delta", 0);
    }
    for (std::uint64_t T : e.config.verify.extra_T) Ts.emplace_back("T=" + std::to_string(T), T);
    for (const auto& [label, T] : Ts)
        out.bounds.push_back(
            {label, T, markov_bound(*alpha, C, out.moments, out.diameter, rate, static_cast<std::int64_t>(T))});
    return out;
}

bool ExperimentResult::bounds_hold() const {
    for (const auto& r : replications)
        for (const auto& v : r.verdicts)
            if (!v.pass) return false;
    return true;
}

// ------------------------------------------------------------------- runs

RunTrace run_replication(const Experiment& e, std::uint64_t seed) {
    RunOptions options;
    options.stride = e.config.run.stride;
    options.tail_fraction = e.config.run.tail_fraction;
    if (e.config.algorithm == Algorithm::Cyclic)
        return run_cyclic(e.problem, e.noise, e.schedule, e.x0, e.config.run.horizon, seed, options);
    return run_markov(e.problem, e.noise, e.schedule, *e.topology, *e.scheme, e.x0, e.policy, e.config.run.horizon,
                      seed, options);
}

std::string trace_csv(const RunTrace& trace, Algorithm algorithm) {
    const bool markov = algorithm == Algorithm::Markov;
    std::string out = markov ? "k,agent,f,dist,inf_f,alpha\n" : "k,f,dist,inf_f,alpha\n";
    out.reserve(out.size() + trace.rows.size() * 80);
    for (const auto& row : trace.rows) {
        out += std::to_string(row.k);
        out += ',';
        if (markov) {
            if (row.agent) out += std::to_string(*row.agent + 1);
            out += ',';
        }
        out += fmt17(row.f);
        out += ',';
        if (row.dist) out += fmt17(*row.dist);
        out += ',';
        out += fmt17(row.inf_f);
        out += ',';
        if (row.alpha) out += fmt17(*row.alpha);
        out += '\n';
    }
    return out;
}

std::string bounds_csv(const BoundsResult& b) {
    std::string out = "label,theorem,T,gap,bias,step,window,mixing\n";
    for (const auto& lb : b.bounds) {
        out += lb.label + "," + lb.report.theorem + ",";
        if (lb.T) out += std::to_string(*lb.T);
        out += "," + fmt17(lb.report.gap);
        for (const char* name : {"bias", "step", "window", "mixing"}) {
            out += ',';
            for (const auto& t : lb.report.terms)
                if (t.name == name) out += fmt17(t.value);
        }
        out += '\n';
    }
    return out;
}

std::string summary_json(const Experiment& e, const ExperimentResult& r) {
    using nlohmann::ordered_json;
    const auto& opt = e.problem.optimum;
    const double f_star = opt.f_star;

    ordered_json j;
    j["engine_version"] = kEngineVersion;
    j["config_hash"] = r.config_hash;
    j["algorithm"] = e.config.algorithm == Algorithm::Markov ? "markov" : "cyclic";
    j["horizon"] = e.config.run.horizon;
    j["replications_requested"] = e.config.run.reps;
    j["base_seed"] = e.config.run.seed;

    ordered_json prob;
    prob["name"] = e.problem.name;
    prob["agents"] = e.problem.agents();
    prob["dim"] = e.problem.dim();
    prob["set"] = e.problem.set.kind_name();
    prob["diameter"] = num(r.bounds.diameter);
    prob["subgradient_bounds"] = e.problem.bounds();
    prob["f_star"] = num(f_star);
    prob["certificate"] = to_string(opt.method);
    if (opt.method == CertificateMethod::GridSearch) prob["grid_resolution"] = opt.resolution;
    prob["certificate_tolerance"] = num(opt.tolerance);
    if (opt.witness) {
        std::vector<double> w(opt.witness->coords().data(), opt.witness->coords().data() + opt.witness->dim());
        prob["witness"] = w;
    }
    j["problem"] = prob;

    j["error_moments"] = {{"mu", num(r.bounds.moments.mu)}, {"nu", num(r.bounds.moments.nu)}};
    if (r.bounds.rate) {
        const auto& rc = *r.bounds.rate;
        j["rate_constants"] = {{"b", num(rc.b)}, {"beta", num(rc.beta)}, {"eta", num(rc.eta)}, {"window", rc.window}};
    }
    if (r.bounds.optimal && r.bounds.rate && r.bounds.rate->beta > 0.0) {
        const auto& o = *r.bounds.optimal;
        j["optimal_T"] = {{"T", o.T},
                          {"formula_T", o.formula_T},
                          {"clamped", o.clamped},
                          {"formula_discrepancy", o.formula_discrepancy}};
    }

    ordered_json bounds = ordered_json::array();
    for (const auto& lb : r.bounds.bounds) {
        ordered_json b;
        b["label"] = lb.label;
        b["theorem"] = lb.report.theorem;
        if (lb.T) b["T"] = *lb.T;
        b["gap"] = num(lb.report.gap);
        ordered_json terms = ordered_json::object();
        for (const auto& t : lb.report.terms) terms[t.name] = num(t.value);
        b["terms"] = terms;
        bounds.push_back(b);
    }
    j["bounds"] = bounds;
    j["notes"] = r.bounds.notes;
    j["verify"] = {{"relative_slack", e.config.verify.relative_slack},
                   {"absolute_slack", e.config.verify.absolute_slack}};

    ordered_json reps = ordered_json::array();
    double sum_final = 0.0, sum_tail = 0.0;
    std::vector<std::size_t> passed(r.bounds.bounds.size(), 0);
    for (const auto& rep : r.replications) {
        const auto& t = rep.trace;
        ordered_json o;
        o["index"] = rep.index;
        o["seed"] = rep.seed;
        o["completed"] = t.completed;
        o["aborted"] = t.aborted;
        if (t.aborted) o["diagnostic"] = t.diagnostic;
        o["final_gap"] = num(t.final_f - f_star);
        o["tail_min_gap"] = num(t.tail_min_f - f_star);
        o["best_gap"] = num(t.best_f - f_star);
        if (!t.visits.empty()) o["visit_frequencies"] = t.visit_frequencies();
        if (!t.warnings.empty()) o["warnings"] = t.warnings;
        ordered_json verdicts = ordered_json::array();
        for (std::size_t b = 0; b < rep.verdicts.size(); ++b) {
            const auto& v = rep.verdicts[b];
            verdicts.push_back({{"label", r.bounds.bounds[b].label},
                                {"observed_inf_gap", num(v.observed_inf - f_star)},
                                {"threshold_gap", num(v.threshold - f_star)},
                                {"margin", num(v.margin)},
                                {"pass", v.pass}});
            if (v.pass) ++passed[b];
        }
        o["verdicts"] = verdicts;
        reps.push_back(o);
        sum_final += t.final_f - f_star;
        sum_tail += t.tail_min_f - f_star;
    }
    j["replications"] = reps;

    const double R = static_cast<double>(std::max<std::size_t>(1, r.replications.size()));
    ordered_json agg;
    agg["mean_final_gap"] = num(sum_final / R);
    agg["mean_tail_min_gap"] = num(sum_tail / R);
    ordered_json fractions = ordered_json::object();
    for (std::size_t b = 0; b < passed.size(); ++b)
        fractions[r.bounds.bounds[b].label] = static_cast<double>(passed[b]) / R;
    agg["pass_fraction"] = fractions;
    agg["bounds_hold"] = r.bounds_hold();
    agg["aborted"] = r.aborted;
    j["aggregate"] = agg;
    return j.dump(2) + "\n";
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp + "'");
        out << content;
        if (!out.flush()) throw Error("write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv("INCSUB_OUT_DIR"); env && *env) return env;
    return "out";
}

ExperimentResult run_experiment(const Experiment& e, const std::optional<std::filesystem::path>& out_dir) {
    ExperimentResult result;
    result.config_hash = config_hash(e.config);
    result.bounds = compute_bounds(e);
    const std::uint64_t R = e.config.run.reps;
    result.replications.resize(R);
    if (out_dir) std::filesystem::create_directories(*out_dir);

    VerifyOptions vopt;
    vopt.relative_slack = e.config.verify.relative_slack;
    vopt.absolute_slack = e.config.verify.absolute_slack;

    std::vector<std::exception_ptr> errors(R);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t r = next++; r < R; r = next++) {
            try {
                ReplicationResult rep;
                rep.index = r;
                rep.seed = e.config.run.seed + r;
                rep.trace = run_replication(e, rep.seed);
                for (const auto& lb : result.bounds.bounds)
                    rep.verdicts.push_back(
                        verify_bound_empirically(rep.trace, lb.report, e.problem.optimum.f_star, vopt));
                if (out_dir) {
                    write_atomically(*out_dir / ("trace_" + std::to_string(r) + ".csv"),
                                     trace_csv(rep.trace, e.config.algorithm));
                    rep.trace.rows.clear();
                    rep.trace.rows.shrink_to_fit();
                }
                result.replications[r] = std::move(rep);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const std::uint64_t jobs = std::max<std::uint64_t>(1, std::min<std::uint64_t>(e.config.run.jobs, R));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::uint64_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    for (const auto& rep : result.replications) result.aborted = result.aborted || rep.trace.aborted;

    if (out_dir) {
        write_atomically(*out_dir / "bounds.csv", bounds_csv(result.bounds));
        write_atomically(*out_dir / "summary.json", summary_json(e, result));
    }
    return result;
}

// ---------------------------------------------------------------- compare

std::vector<CompareCell> compare_bounds(const Experiment& base) {
    std::vector<double> alphas = base.config.compare.alphas;
    if (alphas.empty()) {
        if (!base.schedule.is_constant()) throw ConfigError("compare.alphas", "required with a diminishing schedule");
        alphas.push_back(std::get<ConstantStep>(base.schedule.kind()).alpha);
    }
    std::vector<CompareCell> cells;
    const double f_star = base.problem.optimum.f_star;
    for (double alpha : alphas) {
        Experiment e = base;
        e.config.schedule.kind = "constant";
        e.config.schedule.alpha = alpha;
        e.config.verify.extra_T = base.config.compare.T;
        e.schedule = StepSchedule::constant(alpha);
        const ExperimentResult res = run_experiment(e);
        for (std::size_t b = 0; b < res.bounds.bounds.size(); ++b) {
            const auto& lb = res.bounds.bounds[b];
            CompareCell cell{alpha, lb.label, lb.T, lb.report.gap, 0.0, 0.0, 0.0};
            std::size_t passed = 0;
            for (const auto& rep : res.replications) {
                cell.mean_tail_min_gap += rep.trace.tail_min_f - f_star;
                cell.max_inf_gap = std::max(cell.max_inf_gap, rep.verdicts[b].observed_inf - f_star);
                if (rep.verdicts[b].pass) ++passed;
            }
            const double R = static_cast<double>(res.replications.size());
            cell.mean_tail_min_gap /= R;
            cell.pass_fraction = static_cast<double>(passed) / R;
            cells.push_back(cell);
        }
    }
    return cells;
}

std::string compare_csv(const std::vector<CompareCell>& cells) {
    std::string out = "alpha,label,T,analytic_gap,mean_tail_min_gap,max_inf_gap,pass_fraction\n";
    for (const auto& c : cells) {
        out += fmt17(c.alpha) + "," + c.label + ",";
        if (c.T) out += std::to_string(*c.T);
        out += "," + fmt17(c.analytic_gap) + "," + fmt17(c.mean_tail_min_gap) + "," + fmt17(c.max_inf_gap) + "," +
               fmt17(c.pass_fraction) + "\n";
    }
    return out;
}

}  // namespace incsub
