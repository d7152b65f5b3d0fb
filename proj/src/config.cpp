#include "rtspectra/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "rtspectra/errors.hpp"

namespace rtspectra {

namespace {

using nlohmann::json;

const std::vector<std::pair<Command, std::string>>& command_table() {
    static const std::vector<std::pair<Command, std::string>> t{
        {Command::GrowthRate, "growth-rate"},         {Command::AlphaSweep, "alpha-sweep"},
        {Command::EvolveLinear, "evolve-linear"},     {Command::EvolveNonlinear, "evolve-nonlinear"},
        {Command::EscapeTime, "escape-time"},         {Command::StabilitySuite, "stability-suite"},
        {Command::VerifyAll, "verify-all"}};
    return t;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// Every key of `doc` must exist in `schema`; recurses into objects.
void check_keys(const json& doc, const json& schema, const std::string& path) {
    if (!doc.is_object()) return;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string p = join(path, it.key());
        if (!schema.contains(it.key())) throw ConfigError(p, "unknown key");
        const json& s = schema.at(it.key());
        if (s.is_object()) {
            if (!it.value().is_object()) throw ConfigError(p, "expected an object");
            check_keys(it.value(), s, p);
        }
    }
}

/// Reads typed members of one JSON object, naming the path on failure.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    Reader sub(const char* key) const {
        static const json empty = json::object();
        return Reader(j_.contains(key) ? j_.at(key) : empty, join(path_, key));
    }
    template <class T>
    void get(const char* key, T& out) const {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
                        throw ConfigError(join(path_, key), "expected a nonnegative integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError(join(path_, key), "expected true or false");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
            }
            out = v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(join(path_, key), e.what());
        }
    }
    void get_opt(const char* key, std::optional<double>& out) const {
        if (!j_.contains(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        double x = 0.0;
        get(key, x);
        out = x;
    }
    void get_doubles(const char* key, std::vector<double>& out) const {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(join(path_, key), "expected an array of numbers");
        std::vector<double> r;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]", "expected a number");
            r.push_back(v[i].get<double>());
        }
        out = std::move(r);
    }
    void get_strings(const char* key, std::vector<std::string>& out) const {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(join(path_, key), "expected an array of strings");
        std::vector<std::string> r;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string())
                throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]", "expected a string");
            r.push_back(v[i].get<std::string>());
        }
        out = std::move(r);
    }
    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
};

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json grid_json(const GridSpec& g) {
    return {{"dim", g.dim},
            {"cells", std::vector<int>(g.cells.begin(), g.cells.begin() + g.dim)},
            {"lengths", std::vector<double>(g.lengths.begin(), g.lengths.begin() + g.dim)},
            {"gravity_axis", g.gravity_axis}};
}

GridSpec grid_from(const json& j, const std::string& path) {
    if (j.is_string()) {
        try {
            return GridSpec::parse(j.get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError(path, e.what());
        }
    }
    if (!j.is_object()) throw ConfigError(path, "expected \"NxM[xK]\" or an object");
    GridSpec g;
    const Reader r(j, path);
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "dim" && it.key() != "cells" && it.key() != "lengths" && it.key() != "gravity_axis")
            throw ConfigError(join(path, it.key()), "unknown key");
    r.get("dim", g.dim);
    if (g.dim != 2 && g.dim != 3) throw ConfigError(join(path, "dim"), "must be 2 or 3");
    g.gravity_axis = g.dim - 1;
    r.get("gravity_axis", g.gravity_axis);
    if (j.contains("cells")) {
        const json& c = j.at("cells");
        if (!c.is_array() || static_cast<int>(c.size()) != g.dim)
            throw ConfigError(join(path, "cells"), "expected " + std::to_string(g.dim) + " integers");
        for (int a = 0; a < g.dim; ++a) {
            if (!c[a].is_number_integer()) throw ConfigError(join(path, "cells"), "expected integers");
            g.cells[a] = c[a].get<int>();
        }
    }
    if (j.contains("lengths")) {
        std::vector<double> l;
        r.get_doubles("lengths", l);
        if (static_cast<int>(l.size()) != g.dim)
            throw ConfigError(join(path, "lengths"), "expected " + std::to_string(g.dim) + " numbers");
        for (int a = 0; a < g.dim; ++a) g.lengths[a] = l[a];
    }
    return g;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Command c) {
    for (const auto& [k, v] : command_table())
        if (k == c) return v;
    return "?";
}

Command parse_command(const std::string& name) {
    for (const auto& [k, v] : command_table())
        if (v == name) return k;
    std::string all;
    for (const auto& n : command_names()) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("command", "unknown command '" + name + "' (expected one of " + all + ")");
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& e : command_table()) n.push_back(e.second);
        return n;
    }();
    return names;
}

DensityScheme parse_scheme(const std::string& name) {
    if (name == "fct") return DensityScheme::Fct;
    if (name == "upwind") return DensityScheme::Upwind;
    if (name == "semi_lagrangian") return DensityScheme::SemiLagrangian;
    throw ConfigError("scheme", "unknown density scheme '" + name + "' (fct, upwind, semi_lagrangian)");
}

GridSpec GridSpec::parse(const std::string& text) {
    std::vector<int> n;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t x = text.find('x', pos);
        const std::string part = text.substr(pos, x == std::string::npos ? std::string::npos : x - pos);
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("grid", "expected NxM or NxMxK, got '" + text + "'");
        n.push_back(std::stoi(part));
        if (x == std::string::npos) break;
        pos = x + 1;
    }
    if (n.size() != 2 && n.size() != 3) throw ConfigError("grid", "expected 2 or 3 cell counts, got '" + text + "'");
    GridSpec g;
    g.dim = static_cast<int>(n.size());
    g.gravity_axis = g.dim - 1;
    g.cells = {1, 1, 1};
    for (int a = 0; a < g.dim; ++a) g.cells[a] = n[a];
    return g;
}

StaggeredGrid GridSpec::make() const {
    BoxDomain d;
    d.dim = dim;
    d.lengths = lengths;
    d.gravity_axis = gravity_axis;
    std::array<int, 3> c = cells;
    for (int a = dim; a < 3; ++a) c[a] = 1;
    return StaggeredGrid(d, c);
}

std::string GridSpec::text() const {
    std::string s;
    for (int a = 0; a < dim; ++a) s += (a ? "x" : "") + std::to_string(cells[a]);
    return s;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    auto positive = [](const std::string& field, double v, const std::string& sym) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must satisfy " + sym + " > 0");
    };
    if (grid.dim != 2 && grid.dim != 3) throw ConfigError("grid.dim", "must be 2 or 3");
    for (int a = 0; a < grid.dim; ++a) {
        if (grid.cells[a] < 2) throw ConfigError("grid.cells", "every axis needs at least 2 cells");
        positive("grid.lengths", grid.lengths[a], "length");
    }
    if (grid.gravity_axis < 0 || grid.gravity_axis >= grid.dim)
        throw ConfigError("grid.gravity_axis", "must be an axis index below dim");
    if (profile.empty()) throw ConfigError("profile", "must not be empty");
    positive("params.mu", params.mu, "mu");
    positive("params.g", params.g, "g");
    positive("tolerances.eigen", tolerances.eigen, "tolerance");
    positive("tolerances.fixed_point", tolerances.fixed_point, "tolerance");
    positive("tolerances.projection", tolerances.projection, "tolerance");
    positive("tolerances.evolution_projection", tolerances.evolution_projection, "tolerance");
    if (workers < 0) throw ConfigError("workers", "must be >= 0 (0 = hardware concurrency)");

    if (alpha_sweep.count < 2) throw ConfigError("alpha_sweep.count", "must be >= 2");
    if (!(alpha_sweep.s_min >= 0.0)) throw ConfigError("alpha_sweep.s_min", "must be >= 0");
    if (alpha_sweep.s_max && !(*alpha_sweep.s_max > alpha_sweep.s_min))
        throw ConfigError("alpha_sweep.s_max", "must exceed s_min");

    if (evolve.init != "random" && evolve.init != "eigenmode" && evolve.init != "zero")
        throw ConfigError("evolve.init", "must be random, eigenmode or zero");
    if (!(evolve.amplitude >= 0.0)) throw ConfigError("evolve.amplitude", "must be >= 0");
    positive("evolve.t_end", evolve.t_end, "t_end");
    if (evolve.dt) positive("evolve.dt", *evolve.dt, "dt");
    positive("evolve.cfl", evolve.cfl, "cfl");
    positive("evolve.viscous_factor", evolve.viscous_factor, "viscous_factor");
    if (evolve.checkpoint_every < 0) throw ConfigError("evolve.checkpoint_every", "must be >= 0");
    try {
        parse_scheme(evolve.scheme);
    } catch (const ConfigError& e) {
        throw ConfigError("evolve.scheme", e.what());
    }

    try {
        escape_time.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError("escape_time", e.what());
    }
    positive("escape_time.slope_tolerance", escape_time.slope_tolerance, "tolerance");
    positive("escape_time.linearity_tolerance", escape_time.linearity_tolerance, "tolerance");

    if (sharp_growth.n_random < 0) throw ConfigError("sharp_growth.n_random", "must be >= 0");
    positive("sharp_growth.amplitude", sharp_growth.amplitude, "amplitude");
    positive("sharp_growth.dt_fraction", sharp_growth.dt_fraction, "dt_fraction");
    if (!(sharp_growth.t_end > sharp_growth.fit_start) || !(sharp_growth.fit_start >= 0.0))
        throw ConfigError("sharp_growth.t_end", "must exceed fit_start >= 0");

    if (stability.amplitudes.empty()) throw ConfigError("stability.amplitudes", "must not be empty");
    for (double a : stability.amplitudes)
        if (!(a >= 0.0)) throw ConfigError("stability.amplitudes", "must be >= 0");
    positive("stability.dt", stability.dt, "dt");
    positive("stability.t_max", stability.t_max, "t_max");
    if (stability.density_bound) positive("stability.density_bound", *stability.density_bound, "K");

    if (verify_all.grids.empty()) throw ConfigError("verify_all.grids", "must not be empty");
    for (const auto& g : verify_all.grids) {
        try {
            GridSpec::parse(g);
        } catch (const ConfigError& e) {
            throw ConfigError("verify_all.grids", e.what());
        }
    }
}

int RunConfig::resolved_workers() const {
    if (workers > 0) return workers;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

bool RunConfig::operator==(const RunConfig& o) const { return to_json(*this) == to_json(o); }

json to_json(const RunConfig& c) {
    return {
        {"command", to_string(c.command)},
        {"grid", grid_json(c.grid)},
        {"profile", c.profile},
        {"params", {{"mu", c.params.mu}, {"g", c.params.g}}},
        {"tolerances",
         {{"eigen", c.tolerances.eigen},
          {"fixed_point", c.tolerances.fixed_point},
          {"projection", c.tolerances.projection},
          {"evolution_projection", c.tolerances.evolution_projection}}},
        {"seed", c.seed},
        {"output", c.output},
        {"workers", c.workers},
        {"alpha_sweep", {{"s_min", c.alpha_sweep.s_min}, {"s_max", opt(c.alpha_sweep.s_max)}, {"count", c.alpha_sweep.count}}},
        {"evolve",
         {{"init", c.evolve.init},
          {"amplitude", c.evolve.amplitude},
          {"t_end", c.evolve.t_end},
          {"dt", opt(c.evolve.dt)},
          {"cfl", c.evolve.cfl},
          {"viscous_factor", c.evolve.viscous_factor},
          {"checkpoint_every", c.evolve.checkpoint_every},
          {"scheme", c.evolve.scheme}}},
        {"escape_time",
         {{"deltas", c.escape_time.deltas},
          {"epsilon0", c.escape_time.epsilon0},
          {"dt_fraction", c.escape_time.dt_fraction},
          {"budget_factor", c.escape_time.budget_factor},
          {"slope_tolerance", c.escape_time.slope_tolerance},
          {"linearity_tolerance", c.escape_time.linearity_tolerance},
          {"scheme", to_string(c.escape_time.nonlinear.scheme)}}},
        {"sharp_growth",
         {{"n_random", c.sharp_growth.n_random},
          {"amplitude", c.sharp_growth.amplitude},
          {"dt_fraction", c.sharp_growth.dt_fraction},
          {"t_end", c.sharp_growth.t_end},
          {"fit_start", c.sharp_growth.fit_start},
          {"rate_tolerance", c.sharp_growth.rate_tolerance},
          {"constant_tolerance", c.sharp_growth.constant_tolerance}}},
        {"stability",
         {{"amplitudes", c.stability.amplitudes},
          {"dt", c.stability.dt},
          {"t_max", c.stability.t_max},
          {"density_bound", opt(c.stability.density_bound)},
          {"nonlinear", c.stability.nonlinear},
          {"scheme", to_string(c.stability.nonlinear_options.scheme)}}},
        {"verify_all",
         {{"unstable_profile", c.verify_all.unstable_profile},
          {"stable_profile", c.verify_all.stable_profile},
          {"grids", c.verify_all.grids}}},
    };
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<document>", "expected a JSON object");
    json schema = to_json(RunConfig{});
    // the grid accepts either form and is checked by grid_from
    json doc = j;
    json grid;
    if (doc.contains("grid")) {
        grid = doc["grid"];
        doc.erase("grid");
    }
    schema.erase("grid");
    check_keys(doc, schema, "");

    RunConfig c;
    const Reader r(j, "");
    if (j.contains("command")) {
        std::string name;
        r.get("command", name);
        c.command = parse_command(name);
    }
    if (!grid.is_null()) c.grid = grid_from(grid, "grid");
    r.get("profile", c.profile);
    const Reader p = r.sub("params");
    p.get("mu", c.params.mu);
    p.get("g", c.params.g);
    const Reader t = r.sub("tolerances");
    t.get("eigen", c.tolerances.eigen);
    t.get("fixed_point", c.tolerances.fixed_point);
    t.get("projection", c.tolerances.projection);
    t.get("evolution_projection", c.tolerances.evolution_projection);
    r.get("seed", c.seed);
    r.get("output", c.output);
    r.get("workers", c.workers);

    const Reader a = r.sub("alpha_sweep");
    a.get("s_min", c.alpha_sweep.s_min);
    a.get_opt("s_max", c.alpha_sweep.s_max);
    a.get("count", c.alpha_sweep.count);

    const Reader e = r.sub("evolve");
    e.get("init", c.evolve.init);
    e.get("amplitude", c.evolve.amplitude);
    e.get("t_end", c.evolve.t_end);
    e.get_opt("dt", c.evolve.dt);
    e.get("cfl", c.evolve.cfl);
    e.get("viscous_factor", c.evolve.viscous_factor);
    e.get("checkpoint_every", c.evolve.checkpoint_every);
    e.get("scheme", c.evolve.scheme);

    auto scheme_of = [](const Reader& rd) {
        std::string s = "fct";
        rd.get("scheme", s);
        try {
            return parse_scheme(s);
        } catch (const ConfigError& err) {
            throw ConfigError(join(rd.path(), "scheme"), err.what());
        }
    };
    const Reader x = r.sub("escape_time");
    x.get_doubles("deltas", c.escape_time.deltas);
    x.get("epsilon0", c.escape_time.epsilon0);
    x.get("dt_fraction", c.escape_time.dt_fraction);
    x.get("budget_factor", c.escape_time.budget_factor);
    x.get("slope_tolerance", c.escape_time.slope_tolerance);
    x.get("linearity_tolerance", c.escape_time.linearity_tolerance);
    c.escape_time.nonlinear.scheme = scheme_of(x);

    const Reader sg = r.sub("sharp_growth");
    sg.get("n_random", c.sharp_growth.n_random);
    sg.get("amplitude", c.sharp_growth.amplitude);
    sg.get("dt_fraction", c.sharp_growth.dt_fraction);
    sg.get("t_end", c.sharp_growth.t_end);
    sg.get("fit_start", c.sharp_growth.fit_start);
    sg.get("rate_tolerance", c.sharp_growth.rate_tolerance);
    sg.get("constant_tolerance", c.sharp_growth.constant_tolerance);

    const Reader st = r.sub("stability");
    st.get_doubles("amplitudes", c.stability.amplitudes);
    st.get("dt", c.stability.dt);
    st.get("t_max", c.stability.t_max);
    st.get_opt("density_bound", c.stability.density_bound);
    st.get("nonlinear", c.stability.nonlinear);
    c.stability.nonlinear_options.scheme = scheme_of(st);

    const Reader v = r.sub("verify_all");
    v.get("unstable_profile", c.verify_all.unstable_profile);
    v.get("stable_profile", c.verify_all.stable_profile);
    v.get_strings("grids", c.verify_all.grids);

    // one seed drives every random draw of the run
    c.sharp_growth.seed = c.seed;
    c.stability.seed = c.seed;
    c.validate();
    return c;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "expected key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty()) throw ConfigError(key, "empty path segment");
        if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part) || (*node)[part].is_string()) (*node)[part] = json::object();
        node = &(*node)[part];
        pos = dot + 1;
    }
}

json apply_cli(json doc, const CliOverrides& cli) {
    if (doc.is_null()) doc = json::object();
    if (!doc.is_object()) throw ConfigError("<document>", "expected a JSON object");
    std::map<std::string, std::pair<std::string, json>> seen;  // key -> (flag, value)
    auto claim = [&](const std::string& key, const std::string& flag, const json& value) {
        auto [it, fresh] = seen.emplace(key, std::pair{flag, value});
        if (!fresh && it->second.second != value)
            throw ConfigError(key, "conflicting command-line values: " + it->second.first + " vs " + flag);
    };
    for (const auto& a : cli.sets) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(a, "expected key=value");
        json probe = json::object();
        apply_override(probe, a);
        std::string key = a.substr(0, eq);
        std::string p = "/" + key;
        std::replace(p.begin(), p.end(), '.', '/');
        claim(key, "--set " + a, probe.at(json::json_pointer(p)));
        apply_override(doc, a);
    }
    if (cli.seed) {
        claim("seed", "--seed " + std::to_string(*cli.seed), *cli.seed);
        doc["seed"] = *cli.seed;
    }
    if (cli.out) {
        claim("output", "--out " + *cli.out, *cli.out);
        doc["output"] = *cli.out;
    }
    if (!cli.command.empty()) {
        claim("command", "command " + cli.command, cli.command);
        doc["command"] = cli.command;
    }
    return doc;
}

}  // namespace rtspectra
