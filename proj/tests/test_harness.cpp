#include <gtest/gtest.h>

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "incsub/config.hpp"
#include "incsub/errors.hpp"
#include "incsub/harness.hpp"

using namespace incsub;
namespace fs = std::filesystem;

namespace {

const char* kCyclic = R"(# five-agent quadratic fixture
algorithm = cyclic
problem.fixture = quadratic
problem.m = 5
problem.seed = 7
set.kind = box
set.lower = -0.5, -0.5
set.upper = 1, 1
schedule.kind = constant
schedule.alpha = 0.01
noise.kind = gaussian
noise.nu = 0.5
run.horizon = 2000
run.reps = 3
run.stride = 100
)";

std::string markov_text() {
    std::string s = kCyclic;
    s.replace(s.find("algorithm = cyclic"), 18, "algorithm = markov");
    return s + "topology.kind = static\ntopology.graph = ring:5\nscheme.kind = equal\n";
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("incsub_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string field_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

// ------------------------------------------------------------------ config

TEST(Config, ParsesFlatText) {
    const auto c = parse_config(kCyclic);
    EXPECT_EQ(c.algorithm, Algorithm::Cyclic);
    EXPECT_EQ(c.problem.m, 5u);
    EXPECT_EQ(c.problem.set.lower, (std::vector<double>{-0.5, -0.5}));
    EXPECT_DOUBLE_EQ(*c.noise.nu, 0.5);
    EXPECT_EQ(c.run.horizon, 2000u);
    EXPECT_EQ(c.run.jobs, 1u);
    EXPECT_DOUBLE_EQ(c.verify.relative_slack, 0.02);
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_EQ(field_of(std::string(kCyclic) + "run.horizn = 3\n"), "run.horizn");
    EXPECT_EQ(field_of(std::string(kCyclic) + "topology.graph = ring:5\n"), "topology.graph");
    EXPECT_EQ(field_of(std::string(kCyclic) + "run.s0 = 1\n"), "run.s0");
    EXPECT_EQ(field_of(std::string(kCyclic) + "run.reps = 4\n"), "run.reps");  // duplicate
    std::string bad = kCyclic;
    bad.replace(bad.find("run.reps = 3"), 12, "run.reps = 0");
    EXPECT_EQ(field_of(bad), "run.reps");
    bad = kCyclic;
    bad.replace(bad.find("run.stride = 100"), 16, "run.stride = x");
    EXPECT_EQ(field_of(bad), "run.stride");
    EXPECT_EQ(field_of("algorithm = gossip\n"), "algorithm");
    EXPECT_EQ(field_of("no equals sign\n"), "line 1");
}

TEST(Config, CanonicalFormRoundTrips) {
    for (const std::string& text : {std::string(kCyclic), markov_text()}) {
        const std::string canon = serialize_config(parse_config(text));
        EXPECT_EQ(serialize_config(parse_config(canon)), canon);
        EXPECT_EQ(config_hash(parse_config(canon)), config_hash(parse_config(text)));
    }
}

TEST(Config, JsonMirrorMatchesFlat) {
    const char* json = R"({
      "algorithm": "markov",
      "problem": {"fixture": "quadratic", "m": 5, "seed": 7},
      "set": {"kind": "box", "lower": [-0.5, -0.5], "upper": [1, 1]},
      "schedule": {"kind": "constant", "alpha": 0.01},
      "noise": {"kind": "gaussian", "nu": 0.5},
      "topology": {"kind": "static", "graph": "ring:5"},
      "scheme": {"kind": "equal"},
      "run": {"horizon": 2000, "reps": 3, "stride": 100}
    })";
    EXPECT_EQ(serialize_config(parse_config(json)), serialize_config(parse_config(markov_text())));
}

TEST(Config, HashIgnoresOutputAndJobsOnly) {
    auto a = parse_config(kCyclic);
    auto b = a;
    b.run.out = "/elsewhere";
    b.run.jobs = 8;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.run.seed = 1;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, UtilitiesAndHalfspacesSyntax) {
    const auto c = parse_config(
        "problem.fixture = allocation\nproblem.utilities = log1p:1; sqrt:1; linear:2\n"
        "set.kind = simplex\nset.dim = 3\n");
    ASSERT_EQ(c.problem.utilities.size(), 3u);
    EXPECT_EQ(c.problem.utilities[2].kind, UtilityKind::Linear);
    EXPECT_DOUBLE_EQ(c.problem.utilities[2].weight, 2.0);
    const auto h = parse_config("problem.m = 2\nset.kind = halfspaces\nset.halfspaces = 1,1,1; -1,0,0\n");
    ASSERT_EQ(h.problem.set.halfspaces.size(), 2u);
    EXPECT_EQ(h.problem.set.dim, 2u);
}

// ----------------------------------------------------------------- harness

TEST(Harness, ZeroHorizonWritesInitialRowOnly) {
    auto c = parse_config(kCyclic);
    c.run.horizon = 0;
    c.run.reps = 1;
    const auto e = build_experiment(c);
    const auto dir = scratch("zero");
    const auto r = run_experiment(e, dir);
    const std::string csv = read_file(dir / "trace_0.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    const auto j = nlohmann::json::parse(read_file(dir / "summary.json"));
    EXPECT_NEAR(j["replications"][0]["final_gap"].get<double>(), e.problem.value(e.x0.coords()) - e.problem.optimum.f_star,
                1e-15);
    EXPECT_EQ(r.replications.size(), 1u);
}

TEST(Harness, DiminishingNoiselessCyclicConverges) {
    auto c = parse_config(kCyclic);
    c.schedule.kind = "powerlaw";
    c.schedule.a = 1.0;
    c.schedule.p = 1.0;
    c.noise.kind = "none";
    c.run.horizon = 10000;
    c.run.reps = 1;
    const auto e = build_experiment(c);
    const auto r = run_experiment(e);
    EXPECT_LE(r.replications[0].trace.final_f - e.problem.optimum.f_star, 1e-3);
    EXPECT_TRUE(r.bounds.bounds.empty());
}

TEST(Harness, DisconnectedTopologyRejectedBeforeRunning) {
    std::string text = markov_text();
    text.replace(text.find("ring:5"), 6, "edges:5:1-2,2-3,4-5");
    EXPECT_THROW(build_experiment(parse_config(text)), ValidationError);
}

TEST(Harness, TraceSchemaAndRowCount) {
    auto c = parse_config(markov_text());
    c.run.horizon = 1050;
    c.run.reps = 1;
    const auto e = build_experiment(c);
    const auto dir = scratch("schema");
    run_experiment(e, dir);
    std::istringstream in(read_file(dir / "trace_0.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "k,agent,f,dist,inf_f,alpha");
    std::size_t rows = 0;
    std::string last;
    while (std::getline(in, line)) ++rows, last = line;
    EXPECT_EQ(rows, 1u + 1050 / 100 + 1);
    EXPECT_EQ(last.substr(0, 5), "1050,");
    const std::string bounds = read_file(dir / "bounds.csv");
    EXPECT_EQ(bounds.substr(0, bounds.find('\n')), "label,theorem,T,gap,bias,step,window,mixing");
    EXPECT_NE(bounds.find("\nT*,"), std::string::npos);
}

TEST(Harness, ParallelAndSerialOutputsAreIdentical) {
    for (const std::string& text : {std::string(kCyclic), markov_text()}) {
        auto c = parse_config(text);
        c.run.reps = 4;
        const auto serial_dir = scratch("serial"), parallel_dir = scratch("parallel");
        run_experiment(build_experiment(c), serial_dir);
        c.run.jobs = 3;
        run_experiment(build_experiment(c), parallel_dir);
        for (const char* f : {"trace_0.csv", "trace_3.csv", "summary.json", "bounds.csv"})
            EXPECT_EQ(read_file(serial_dir / f), read_file(parallel_dir / f)) << f;
    }
}

TEST(Harness, SummaryHasVerdictsPerReplication) {
    const auto e = build_experiment(parse_config(markov_text()));
    const auto r = run_experiment(e);
    const auto j = nlohmann::json::parse(summary_json(e, r));
    EXPECT_EQ(j["engine_version"], kEngineVersion);
    EXPECT_EQ(j["replications"].size(), 3u);
    EXPECT_EQ(j["replications"][1]["seed"], 1);
    EXPECT_EQ(j["replications"][0]["verdicts"].size(), r.bounds.bounds.size());
    EXPECT_TRUE(j["rate_constants"].contains("beta"));
    EXPECT_EQ(j["replications"][0]["visit_frequencies"].size(), 5u);
}

TEST(Harness, CompareOptimalColumnDominatesFixedT) {
    auto c = parse_config(markov_text());
    c.compare.alphas = {0.02, 0.005};
    c.compare.T = {0, 5, 50, 500};
    c.run.reps = 2;
    const auto cells = compare_bounds(build_experiment(c));
    for (double a : c.compare.alphas) {
        double star = 0;
        for (const auto& cell : cells)
            if (cell.alpha == a && cell.label == "T*") star = cell.analytic_gap;
        for (const auto& cell : cells)
            if (cell.alpha == a) EXPECT_LE(star, cell.analytic_gap + 1e-12) << cell.label;
    }
    const std::string csv = compare_csv(cells);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha,label,T,analytic_gap,mean_tail_min_gap,max_inf_gap,pass_fraction");
}

TEST(Harness, UniformChainRowIsHalfAlphaCSquared) {
    std::string text = markov_text();
    text.replace(text.find("ring:5"), 6, "complete:5");
    text.replace(text.find("noise.kind = gaussian"), 21, "noise.kind = none");
    text.replace(text.find("noise.nu = 0.5\n"), 15, "");
    const auto e = build_experiment(parse_config(text));
    const auto b = compute_bounds(e);
    ASSERT_TRUE(b.rate);
    EXPECT_EQ(b.rate->beta, 0.0);
    const double C = e.problem.max_bound();
    EXPECT_NEAR(b.bounds.front().report.gap, 0.5 * 0.01 * C * C, 1e-15);
}

TEST(Harness, GraphSpecs) {
    EXPECT_EQ(parse_graph("ring:4"), Graph::ring(4));
    EXPECT_EQ(parse_graph("edges:3:1-2,2-3"), Graph::path(3));
    EXPECT_THROW(parse_graph("ring"), ConfigError);
    EXPECT_THROW(parse_graph("edges:3:0-1"), ConfigError);
    EXPECT_THROW(parse_graph("torus:3"), ConfigError);
}

#ifdef INCSUB_CLI_PATH
TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    const std::string cli = INCSUB_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    const auto good = write("good.conf", kCyclic);
    EXPECT_EQ(run("run --config " + good + " --out " + (dir / "o").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "o" / "summary.json"));
    EXPECT_EQ(run("validate --config " + good), 0);
    EXPECT_EQ(run("bounds --config " + good + " --out " + (dir / "b").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "b" / "bounds.csv"));
    EXPECT_EQ(run("run --config " + write("bad.conf", std::string(kCyclic) + "bogus = 1\n")), 2);
    EXPECT_EQ(run("frobnicate"), 2);

    // A bound shrunk to nothing cannot hold; --assert-bounds turns that into exit 1.
    std::string tight = kCyclic;
    tight += "verify.relative_slack = 0\n";
    tight.replace(tight.find("schedule.alpha = 0.01"), 21, "schedule.alpha = 1e-12");
    tight.replace(tight.find("run.horizon = 2000"), 18, "run.horizon = 3");
    EXPECT_EQ(run("run --assert-bounds --config " + write("tight.conf", tight) + " --out " + (dir / "t").string()), 1);
}
#endif
