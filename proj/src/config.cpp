#include "incsub/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "incsub/errors.hpp"

namespace incsub {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double to_double(const std::string& field, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw ConfigError(field, "expected a number, got '" + text + "'");
    return v;
}

std::uint64_t to_u64(const std::string& field, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(field, "expected a nonnegative integer, got '" + text + "'");
    return v;
}

std::vector<double> to_vector(const std::string& field, const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& part : split(text, ',')) out.push_back(to_double(field, part));
    return out;
}

std::vector<std::vector<double>> to_matrix(const std::string& field, const std::string& text) {
    std::vector<std::vector<double>> out;
    if (trim(text).empty()) return out;
    for (const auto& row : split(text, ';')) out.push_back(to_vector(field, row));
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

std::string join(const std::vector<std::vector<double>>& rows) {
    std::string s;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) s += ';';
        s += join(rows[i]);
    }
    return s;
}

template <class T>
std::string join_ints(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

// Consumes keys from a flat map and reports leftovers.
class Reader {
public:
    explicit Reader(const FlatConfig& flat) : flat_(flat) {}

    bool has(const std::string& key) const { return flat_.count(key) != 0; }

    std::optional<std::string> take(const std::string& key) {
        auto it = flat_.find(key);
        if (it == flat_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    std::string str(const std::string& key, std::string def) { return take(key).value_or(std::move(def)); }
    double num(const std::string& key, double def) {
        auto v = take(key);
        return v ? to_double(key, *v) : def;
    }
    std::uint64_t u64(const std::string& key, std::uint64_t def) {
        auto v = take(key);
        return v ? to_u64(key, *v) : def;
    }
    std::vector<double> vec(const std::string& key) {
        auto v = take(key);
        return v ? to_vector(key, *v) : std::vector<double>{};
    }
    std::vector<std::vector<double>> mat(const std::string& key) {
        auto v = take(key);
        return v ? to_matrix(key, *v) : std::vector<std::vector<double>>{};
    }
    bool boolean(const std::string& key, bool def) {
        auto v = take(key);
        if (!v) return def;
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw ConfigError(key, "expected true or false");
    }

    void reject_prefix(const std::string& prefix, const std::string& why) const {
        for (const auto& [k, v] : flat_)
            if (k.rfind(prefix, 0) == 0) throw ConfigError(k, why);
    }

    void finish() const {
        for (const auto& [k, v] : flat_)
            if (!used_.count(k)) throw ConfigError(k, "unknown key");
    }

private:
    const FlatConfig& flat_;
    std::set<std::string> used_;
};

void require_one_of(const std::string& field, const std::string& value, std::initializer_list<const char*> options) {
    for (const char* o : options)
        if (value == o) return;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : "|") + o;
    throw ConfigError(field, "expected one of " + list + ", got '" + value + "'");
}

Utility parse_utility(const std::string& field, const std::string& text) {
    const auto parts = split(text, ':');
    Utility u;
    const std::string& kind = parts[0];
    if (kind == "log1p") u.kind = UtilityKind::Log1p;
    else if (kind == "sqrt") u.kind = UtilityKind::Sqrt;
    else if (kind == "linear") u.kind = UtilityKind::Linear;
    else if (kind == "capped") u.kind = UtilityKind::CappedLinear;
    else throw ConfigError(field, "unknown utility '" + kind + "'");
    if (parts.size() > 3) throw ConfigError(field, "utility takes kind:weight[:param]");
    if (parts.size() >= 2) u.weight = to_double(field, parts[1]);
    if (parts.size() == 3) u.param = to_double(field, parts[2]);
    if (u.kind == UtilityKind::CappedLinear && parts.size() != 3) throw ConfigError(field, "capped utility needs a cap");
    return u;
}

std::string format_utility(const Utility& u) {
    std::string s = std::string(to_string(u.kind)) + ":" + format_double(u.weight);
    if (u.kind == UtilityKind::CappedLinear || (u.kind == UtilityKind::Sqrt && u.param > 0.0))
        s += ":" + format_double(u.param);
    return s;
}

void flatten(const nlohmann::json& j, const std::string& prefix, FlatConfig& out) {
    auto scalar = [](const nlohmann::json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        if (v.is_number_float()) return format_double(v.get<double>());
        throw ConfigError("json", "unsupported value " + v.dump());
    };
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        return;
    }
    std::string value;
    if (j.is_array()) {
        // Arrays of arrays join with ';', arrays of scalars with ','; string
        // arrays of graphs (topology.graphs) join with '|'.
        const bool nested = !j.empty() && j.front().is_array();
        const bool graphs = prefix == "topology.graphs";
        const bool listy = prefix == "problem.utilities";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) value += nested || listy ? ";" : graphs ? "|" : ",";
            if (nested) {
                for (std::size_t c = 0; c < j[i].size(); ++c) value += (c ? "," : "") + scalar(j[i][c]);
            } else {
                value += scalar(j[i]);
            }
        }
    } else {
        value = scalar(j);
    }
    if (!out.emplace(prefix, value).second) throw ConfigError(prefix, "duplicate key");
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

FlatConfig parse_flat(std::string_view text) {
    FlatConfig flat;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        if (!flat.emplace(key, value).second) throw ConfigError(key, "duplicate key");
    }
    return flat;
}

FlatConfig flatten_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("json", e.what());
    }
    if (!j.is_object()) throw ConfigError("json", "top level must be an object");
    FlatConfig flat;
    flatten(j, "", flat);
    return flat;
}

ExperimentConfig config_from_flat(const FlatConfig& flat) {
    Reader r(flat);
    ExperimentConfig c;

    const std::string algorithm = r.str("algorithm", "cyclic");
    require_one_of("algorithm", algorithm, {"cyclic", "markov"});
    c.algorithm = algorithm == "markov" ? Algorithm::Markov : Algorithm::Cyclic;
    if (c.algorithm == Algorithm::Cyclic) {
        r.reject_prefix("topology.", "only valid for markov runs");
        r.reject_prefix("scheme.", "only valid for markov runs");
        if (r.has("run.s0")) throw ConfigError("run.s0", "only valid for markov runs");
    }

    auto& p = c.problem;
    p.fixture = r.str("problem.fixture", "quadratic");
    require_one_of("problem.fixture", p.fixture, {"quadratic", "regression", "allocation"});
    p.grid_resolution = r.num("problem.grid_resolution", 1e-4);
    if (!(p.grid_resolution > 0.0)) throw ConfigError("problem.grid_resolution", "must be > 0");
    if (p.fixture == "quadratic") {
        p.m = r.u64("problem.m", 0);
        p.spread = r.num("problem.spread", 1.0);
        p.seed = r.u64("problem.seed", 0);
        p.centers = r.mat("problem.centers");
        if (p.centers.empty() && p.m == 0) throw ConfigError("problem.m", "need problem.m or problem.centers");
        if (!p.centers.empty()) p.m = p.centers.size();
    } else if (p.fixture == "regression") {
        p.locations = r.vec("problem.locations");
        for (double v : r.vec("problem.powers")) p.powers.push_back(static_cast<int>(v));
        p.samples = r.mat("problem.samples");
        p.true_x = r.vec("problem.true_x");
        p.noise_sigma = r.num("problem.noise_sigma", 0.0);
        p.seed = r.u64("problem.seed", 0);
        p.samples_per_agent = r.u64("problem.samples_per_agent", 0);
        if (p.locations.empty()) throw ConfigError("problem.locations", "required for regression");
        if (p.powers.empty()) throw ConfigError("problem.powers", "required for regression");
        if (p.samples.empty() && p.samples_per_agent == 0)
            throw ConfigError("problem.samples_per_agent", "zero samples");
    } else {
        if (auto u = r.take("problem.utilities")) {
            for (const auto& part : split(*u, ';')) p.utilities.push_back(parse_utility("problem.utilities", part));
        } else {
            throw ConfigError("problem.utilities", "required for allocation");
        }
    }

    auto& s = p.set;
    s.kind = r.str("set.kind", "box");
    require_one_of("set.kind", s.kind, {"box", "ball", "simplex", "halfspaces"});
    s.dim = r.u64("set.dim", 0);
    if (s.kind == "box") {
        s.lower = r.vec("set.lower");
        s.upper = r.vec("set.upper");
        if (s.lower.empty() || s.upper.empty()) throw ConfigError("set.lower", "box needs lower and upper");
        const std::size_t dim = std::max({s.dim, s.lower.size(), s.upper.size()});
        if (s.lower.size() == 1) s.lower.assign(dim, s.lower[0]);
        if (s.upper.size() == 1) s.upper.assign(dim, s.upper[0]);
        if (s.lower.size() != dim || s.upper.size() != dim) throw ConfigError("set.upper", "bound lengths differ");
        s.dim = dim;
    } else if (s.kind == "ball") {
        s.center = r.vec("set.center");
        s.radius = r.num("set.radius", 1.0);
        if (s.center.empty()) {
            if (s.dim == 0) throw ConfigError("set.center", "ball needs a center or set.dim");
            s.center.assign(s.dim, 0.0);
        }
        if (s.center.size() == 1 && s.dim > 1) s.center.assign(s.dim, s.center[0]);
        s.dim = s.center.size();
    } else if (s.kind == "simplex") {
        s.scale = r.num("set.scale", 1.0);
        if (s.dim == 0) throw ConfigError("set.dim", "simplex needs a dimension");
    } else {
        s.halfspaces = r.mat("set.halfspaces");
        if (s.halfspaces.empty()) throw ConfigError("set.halfspaces", "need at least one constraint");
        for (const auto& h : s.halfspaces)
            if (h.size() < 2 || h.size() != s.halfspaces.front().size())
                throw ConfigError("set.halfspaces", "each constraint is normal...,offset of equal length");
        s.dim = s.halfspaces.front().size() - 1;
    }

    auto& sc = c.schedule;
    sc.kind = r.str("schedule.kind", "powerlaw");
    require_one_of("schedule.kind", sc.kind, {"constant", "powerlaw"});
    if (sc.kind == "constant") {
        sc.alpha = r.num("schedule.alpha", 0.01);
    } else {
        sc.a = r.num("schedule.a", 1.0);
        sc.p = r.num("schedule.p", 1.0);
    }

    auto& n = c.noise;
    n.kind = r.str("noise.kind", "none");
    require_one_of("noise.kind", n.kind, {"none", "gaussian", "biased", "uniform"});
    if (n.kind == "gaussian") {
        if (auto nu = r.take("noise.nu")) {
            n.nu = to_double("noise.nu", *nu);
            if (r.has("noise.sigma")) throw ConfigError("noise.sigma", "give either noise.nu or noise.sigma");
        } else {
            n.sigma = r.num("noise.sigma", 0.0);
        }
        n.sigma_decay = r.num("noise.sigma_decay", 0.0);
    } else if (n.kind == "biased") {
        n.sigma = r.num("noise.sigma", 0.0);
        n.sigma_decay = r.num("noise.sigma_decay", 0.0);
        n.bias = r.num("noise.bias", 0.0);
        n.bias_decay = r.num("noise.bias_decay", 0.0);
        n.direction = r.vec("noise.direction");
    } else if (n.kind == "uniform") {
        n.radius = r.num("noise.radius", 0.0);
        n.radius_decay = r.num("noise.radius_decay", 0.0);
    }

    if (c.algorithm == Algorithm::Markov) {
        auto& t = c.topology;
        t.kind = r.str("topology.kind", "static");
        require_one_of("topology.kind", t.kind, {"static", "periodic", "random"});
        if (t.kind == "periodic") {
            const auto g = r.take("topology.graphs");
            if (!g) throw ConfigError("topology.graphs", "required for periodic topology");
            t.graphs = split(*g, '|');
        } else {
            const auto g = r.take("topology.graph");
            if (!g) throw ConfigError("topology.graph", "required");
            t.graph = *g;
        }
        if (t.kind == "random") {
            t.inclusion = r.num("topology.inclusion", 0.5);
            t.window = r.u64("topology.window", 1);
            t.seed = r.u64("topology.seed", 0);
        }
        auto& sch = c.scheme;
        sch.kind = r.str("scheme.kind", "equal");
        require_one_of("scheme.kind", sch.kind, {"equal", "min_equal", "weighted_mh"});
        if (sch.kind == "weighted_mh") {
            sch.weights = r.vec("scheme.weights");
            if (sch.weights.empty()) throw ConfigError("scheme.weights", "required for weighted_mh");
        }
        c.run.s0 = r.str("run.s0", "uniform");
        if (c.run.s0 != "uniform") {
            const auto idx = to_u64("run.s0", c.run.s0);
            if (idx == 0) throw ConfigError("run.s0", "agent indices are 1-based");
        }
    }

    auto& run = c.run;
    run.horizon = r.u64("run.horizon", 1000);
    run.reps = r.u64("run.reps", 1);
    run.seed = r.u64("run.seed", 0);
    run.out = r.str("run.out", "");
    run.stride = r.u64("run.stride", 1);
    run.x0 = r.vec("run.x0");
    run.jobs = r.u64("run.jobs", 1);
    run.tail_fraction = r.num("run.tail_fraction", 0.1);
    if (run.reps == 0) throw ConfigError("run.reps", "must be >= 1");
    if (run.stride == 0) throw ConfigError("run.stride", "must be >= 1");
    if (run.jobs == 0) throw ConfigError("run.jobs", "must be >= 1");
    if (!(run.tail_fraction >= 0.0 && run.tail_fraction <= 1.0)) throw ConfigError("run.tail_fraction", "must lie in [0, 1]");

    auto& v = c.verify;
    v.relative_slack = r.num("verify.relative_slack", 0.02);
    v.absolute_slack = r.num("verify.absolute_slack", 0.0);
    v.assert_bounds = r.boolean("verify.assert_bounds", false);
    for (double t : r.vec("verify.T")) {
        if (t < 0 || t != std::floor(t)) throw ConfigError("verify.T", "expected nonnegative integers");
        v.extra_T.push_back(static_cast<std::uint64_t>(t));
    }
    if (v.relative_slack < 0.0) throw ConfigError("verify.relative_slack", "must be >= 0");
    if (v.absolute_slack < 0.0) throw ConfigError("verify.absolute_slack", "must be >= 0");

    c.compare.alphas = r.vec("compare.alphas");
    for (double a : c.compare.alphas)
        if (!(a > 0.0)) throw ConfigError("compare.alphas", "step sizes must be > 0");
    for (double t : r.vec("compare.T")) {
        if (t < 0 || t != std::floor(t)) throw ConfigError("compare.T", "expected nonnegative integers");
        c.compare.T.push_back(static_cast<std::uint64_t>(t));
    }

    r.finish();
    return c;
}

ExperimentConfig parse_config(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') return config_from_flat(flatten_json(text));
    return config_from_flat(parse_flat(text));
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    FlatConfig f;
    f["algorithm"] = c.algorithm == Algorithm::Markov ? "markov" : "cyclic";

    const auto& p = c.problem;
    f["problem.fixture"] = p.fixture;
    f["problem.grid_resolution"] = format_double(p.grid_resolution);
    if (p.fixture == "quadratic") {
        if (!p.centers.empty()) {
            f["problem.centers"] = join(p.centers);
        } else {
            f["problem.m"] = std::to_string(p.m);
            f["problem.spread"] = format_double(p.spread);
            f["problem.seed"] = std::to_string(p.seed);
        }
    } else if (p.fixture == "regression") {
        f["problem.locations"] = join(p.locations);
        f["problem.powers"] = join_ints(p.powers);
        if (!p.samples.empty()) {
            f["problem.samples"] = join(p.samples);
        } else {
            f["problem.true_x"] = join(p.true_x);
            f["problem.noise_sigma"] = format_double(p.noise_sigma);
            f["problem.seed"] = std::to_string(p.seed);
            f["problem.samples_per_agent"] = std::to_string(p.samples_per_agent);
        }
    } else {
        std::string u;
        for (const auto& util : p.utilities) u += (u.empty() ? "" : ";") + format_utility(util);
        f["problem.utilities"] = u;
    }

    const auto& s = p.set;
    f["set.kind"] = s.kind;
    if (s.kind == "box") {
        f["set.lower"] = join(s.lower);
        f["set.upper"] = join(s.upper);
    } else if (s.kind == "ball") {
        f["set.center"] = join(s.center);
        f["set.radius"] = format_double(s.radius);
    } else if (s.kind == "simplex") {
        f["set.dim"] = std::to_string(s.dim);
        f["set.scale"] = format_double(s.scale);
    } else {
        f["set.halfspaces"] = join(s.halfspaces);
    }

    f["schedule.kind"] = c.schedule.kind;
    if (c.schedule.kind == "constant") {
        f["schedule.alpha"] = format_double(c.schedule.alpha);
    } else {
        f["schedule.a"] = format_double(c.schedule.a);
        f["schedule.p"] = format_double(c.schedule.p);
    }

    const auto& n = c.noise;
    f["noise.kind"] = n.kind;
    if (n.kind == "gaussian") {
        if (n.nu) f["noise.nu"] = format_double(*n.nu);
        else f["noise.sigma"] = format_double(n.sigma);
        f["noise.sigma_decay"] = format_double(n.sigma_decay);
    } else if (n.kind == "biased") {
        f["noise.sigma"] = format_double(n.sigma);
        f["noise.sigma_decay"] = format_double(n.sigma_decay);
        f["noise.bias"] = format_double(n.bias);
        f["noise.bias_decay"] = format_double(n.bias_decay);
        if (!n.direction.empty()) f["noise.direction"] = join(n.direction);
    } else if (n.kind == "uniform") {
        f["noise.radius"] = format_double(n.radius);
        f["noise.radius_decay"] = format_double(n.radius_decay);
    }

    if (c.algorithm == Algorithm::Markov) {
        const auto& t = c.topology;
        f["topology.kind"] = t.kind;
        if (t.kind == "periodic") {
            std::string g;
            for (const auto& x : t.graphs) g += (g.empty() ? "" : "|") + x;
            f["topology.graphs"] = g;
        } else {
            f["topology.graph"] = t.graph;
        }
        if (t.kind == "random") {
            f["topology.inclusion"] = format_double(t.inclusion);
            f["topology.window"] = std::to_string(t.window);
            f["topology.seed"] = std::to_string(t.seed);
        }
        f["scheme.kind"] = c.scheme.kind;
        if (c.scheme.kind == "weighted_mh") f["scheme.weights"] = join(c.scheme.weights);
        f["run.s0"] = c.run.s0;
    }

    const auto& run = c.run;
    f["run.horizon"] = std::to_string(run.horizon);
    f["run.reps"] = std::to_string(run.reps);
    f["run.seed"] = std::to_string(run.seed);
    if (!run.out.empty()) f["run.out"] = run.out;
    f["run.stride"] = std::to_string(run.stride);
    if (!run.x0.empty()) f["run.x0"] = join(run.x0);
    f["run.jobs"] = std::to_string(run.jobs);
    f["run.tail_fraction"] = format_double(run.tail_fraction);

    f["verify.relative_slack"] = format_double(c.verify.relative_slack);
    f["verify.absolute_slack"] = format_double(c.verify.absolute_slack);
    f["verify.assert_bounds"] = c.verify.assert_bounds ? "true" : "false";
    if (!c.verify.extra_T.empty()) f["verify.T"] = join_ints(c.verify.extra_T);
    if (!c.compare.alphas.empty()) f["compare.alphas"] = join(c.compare.alphas);
    if (!c.compare.T.empty()) f["compare.T"] = join_ints(c.compare.T);

    std::string out;
    for (const auto& [k, v] : f) out += k + " = " + v + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    // Output location and parallelism do not change results.
    ExperimentConfig c = config;
    c.run.out.clear();
    c.run.jobs = 1;
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace incsub
