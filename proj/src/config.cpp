#include "nnlif/config.hpp"

#include "nnlif/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace nnlif {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double as_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

int as_int(const std::string& key, const std::string& v) {
    int x = 0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct Builder {
    RunConfig cfg;
    std::string c_value = "1";
    std::set<std::string> seen;

    using Setter = std::function<void(const std::string&, const std::string&)>;

    std::map<std::string, Setter> table() {
        std::map<std::string, Setter> t;
        auto num = [](double& field) {
            return Setter([&field](const std::string& k, const std::string& v) { field = as_double(k, v); });
        };
        auto integer = [](int& field) {
            return Setter([&field](const std::string& k, const std::string& v) { field = as_int(k, v); });
        };
        t["params.V_L"] = num(cfg.params.V_L);
        t["params.V_R"] = num(cfg.params.V_R);
        t["params.V_F"] = num(cfg.params.V_F);
        t["params.mu0"] = num(cfg.params.mu0);
        t["params.b"] = num(cfg.params.b);
        t["params.a0"] = num(cfg.params.a0);
        t["params.a1"] = num(cfg.params.a1);
        t["dilation.c"] = [this](const std::string& k, const std::string& v) {
            if (v != "working") as_double(k, v);
            c_value = v;
        };
        t["grid.n"] = integer(cfg.grid.n);
        t["grid.tail_tolerance"] = num(cfg.grid.tail_tolerance);
        t["grid.v_min"] = [this](const std::string& k, const std::string& v) {
            if (v == "auto")
                cfg.grid.v_min.reset();
            else
                cfg.grid.v_min = as_double(k, v);
        };
        t["stepper.dtau"] = num(cfg.stepper.dtau);
        t["stepper.horizon"] = num(cfg.stepper.horizon);
        t["stepper.snapshot_stride"] = integer(cfg.stepper.snapshot_stride);
        t["stepper.blowup_epsilon"] = num(cfg.stepper.blowup_epsilon);
        t["stepper.scheme"] = [this](const std::string&, const std::string& v) {
            cfg.stepper.scheme = scheme_from_string(v);
        };
        t["initial.kind"] = [this](const std::string& k, const std::string& v) {
            if (v == "gaussian")
                cfg.initial.kind = InitialKind::Gaussian;
            else if (v == "steady_excitatory")
                cfg.initial.kind = InitialKind::SteadyExcitatory;
            else if (v == "steady_inhibitory")
                cfg.initial.kind = InitialKind::SteadyInhibitory;
            else if (v == "csv")
                cfg.initial.kind = InitialKind::FromCSV;
            else
                throw ConfigError(k + ": expected gaussian, steady_excitatory, steady_inhibitory or csv");
        };
        t["initial.center"] = num(cfg.initial.center);
        t["initial.variance"] = num(cfg.initial.variance);
        t["initial.perturbation"] = num(cfg.initial.perturbation);
        t["initial.path"] = [this](const std::string&, const std::string& v) { cfg.initial.path = v; };
        t["entropy.G"] = [this](const std::string& k, const std::string& v) {
            if (v == "centered")
                cfg.options.entropy_G = EntropyChoice::QuadraticCentered;
            else if (v == "quadratic")
                cfg.options.entropy_G = EntropyChoice::Quadratic;
            else
                throw ConfigError(k + ": expected centered or quadratic");
        };
        t["entropy.equation"] = [this](const std::string& k, const std::string& v) {
            if (v != "limit" && v != "nonlinear") throw ConfigError(k + ": expected limit or nonlinear");
            cfg.options.entropy_limit = v == "limit";
        };
        t["fb.sigma"] = num(cfg.options.fb_sigma);
        t["fb.intervals"] = integer(cfg.options.fb_intervals);
        t["poincare.weight"] = [this](const std::string& k, const std::string& v) {
            if (v == "steady")
                cfg.options.poincare_weight = PoincareWeight::Steady;
            else if (v == "constant")
                cfg.options.poincare_weight = PoincareWeight::Constant;
            else if (v == "decay")
                cfg.options.poincare_weight = PoincareWeight::Decay;
            else
                throw ConfigError(k + ": expected steady, constant or decay");
        };
        t["poincare.n"] = integer(cfg.options.poincare_n);
        t["poincare.length"] = [this](const std::string& k, const std::string& v) {
            cfg.options.poincare_length = as_double(k, v);
        };
        t["fb.volterra"] = [this](const std::string& k, const std::string& v) {
            if (v != "true" && v != "false") throw ConfigError(k + ": expected true or false");
            cfg.options.fb_volterra = v == "true";
        };
        t["sweep.command"] = [this](const std::string& k, const std::string& v) {
            static const std::set<std::string> ok = {"simulate", "steady", "jump", "entropy", "fb-check", "poincare"};
            if (!ok.count(v)) throw ConfigError(k + ": unsupported sweep command '" + v + "'");
            cfg.options.sweep_command = v;
        };
        return t;
    }

    void apply(const std::map<std::string, Setter>& t, const std::string& key, const std::string& value) {
        if (key == "preset") return;
        if (key.rfind("sweep.", 0) == 0 && key != "sweep.command") {
            const std::string target = key.substr(6);
            if (!t.count(target) || target.rfind("sweep.", 0) == 0)
                throw ConfigError(key + ": unknown sweep target '" + target + "'");
            auto values = split_list(value);
            if (values.empty()) throw ConfigError(key + ": empty value list");
            auto& axes = cfg.options.sweep_axes;
            auto it = std::find_if(axes.begin(), axes.end(), [&](const auto& a) { return a.first == target; });
            if (it != axes.end())
                it->second = values;
            else
                axes.emplace_back(target, values);
            return;
        }
        auto it = t.find(key);
        if (it == t.end()) throw ConfigError("unknown key '" + key + "'");
        if (value.empty()) throw ConfigError(key + ": missing value");
        it->second(key, value);
        seen.insert(key);
    }

    void validate() {
        for (const char* k : {"params.V_F", "params.V_R", "params.b", "params.a0", "params.a1"})
            if (!seen.count(k)) throw ConfigError(std::string(k) + ": required key is missing");
        try {
            cfg.params.validate();
        } catch (const PreconditionError& e) {
            throw ConfigError(e.what());
        }
        try {
            cfg.dil = c_value == "working" ? DilationParams::working(cfg.params)
                                           : DilationParams::make(cfg.params, as_double("dilation.c", c_value));
        } catch (const PreconditionError& e) {
            throw ConfigError(e.what());
        }
        cfg.stepper.validate();
        if (cfg.grid.n < 16) throw ConfigError("grid.n must be at least 16");
        if (!(cfg.grid.tail_tolerance > 0.0 && cfg.grid.tail_tolerance <= 1e-3))
            throw ConfigError("grid.tail_tolerance must lie in (0, 1e-3]");
        if (cfg.grid.v_min && !(*cfg.grid.v_min < cfg.params.V_R))
            throw ConfigError("grid.v_min must lie below params.V_R");
        const auto& in = cfg.initial;
        if (in.kind == InitialKind::Gaussian) {
            if (!(in.variance > 0.0)) throw ConfigError("initial.variance must be positive");
            if (!(in.center < cfg.params.V_F)) throw ConfigError("initial.center must lie below params.V_F");
        }
        if (in.kind == InitialKind::SteadyExcitatory && !(cfg.params.b > 0.0))
            throw ConfigError("initial.kind: steady_excitatory needs params.b > 0");
        if (in.kind == InitialKind::SteadyInhibitory && cfg.params.b > 0.0)
            throw ConfigError("initial.kind: steady_inhibitory needs params.b <= 0");
        if (in.kind == InitialKind::FromCSV && in.path.empty()) throw ConfigError("initial.path is required for csv");
        if (!(std::fabs(in.perturbation) < 1.0)) throw ConfigError("initial.perturbation must lie in (-1, 1)");
        const auto& o = cfg.options;
        if (!(o.fb_sigma > 0.0)) throw ConfigError("fb.sigma must be positive");
        if (o.fb_intervals < 4) throw ConfigError("fb.intervals must be at least 4");
        if (o.poincare_n < 8) throw ConfigError("poincare.n must be at least 8");
        if (o.poincare_length && !(*o.poincare_length > 0.0)) throw ConfigError("poincare.length must be positive");
    }
};

} // namespace

Assignments parse_document(const std::string& text) {
    Assignments out;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

std::pair<std::string, std::string> parse_override(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + arg + "' must have the form key=value");
    return {trim(arg.substr(0, eq)), trim(arg.substr(eq + 1))};
}

std::vector<std::string> preset_names() { return {"fig-eternal", "fig-jump"}; }

Assignments preset(const std::string& name) {
    if (name == "fig-eternal")
        return {{"params.V_F", "1"},         {"params.V_R", "0"},           {"params.b", "1.5"},
                {"params.a0", "1"},          {"params.a1", "1"},            {"params.V_L", "0"},
                {"params.mu0", "0"},         {"initial.kind", "gaussian"},  {"initial.center", "-1"},
                {"initial.variance", "0.17"}, {"stepper.horizon", "5"},     {"grid.n", "1024"},
                {"stepper.dtau", "1e-4"}};
    if (name == "fig-jump")
        return {{"params.V_F", "1"},          {"params.V_R", "0"},          {"params.b", "0.9"},
                {"params.a0", "0.5"},         {"params.a1", "1"},           {"params.V_L", "0"},
                {"params.mu0", "0"},          {"initial.kind", "gaussian"}, {"initial.center", "0.2"},
                {"initial.variance", "0.005"}, {"stepper.horizon", "4"},    {"grid.n", "2048"},
                {"stepper.dtau", "5e-5"}};
    throw ConfigError("preset: unknown preset '" + name + "'");
}

RunConfig build_config(const Assignments& assignments) {
    Builder b;
    const auto t = b.table();
    std::string preset_name;
    for (const auto& [k, v] : assignments)
        if (k == "preset") preset_name = v;
    if (!preset_name.empty())
        for (const auto& [k, v] : preset(preset_name)) b.apply(t, k, v);
    for (const auto& [k, v] : assignments) b.apply(t, k, v);
    b.validate();
    b.cfg.preset = preset_name;
    b.cfg.assignments = assignments;
    return b.cfg;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    Assignments a = parse_document(text);
    for (const auto& o : overrides) a.push_back(parse_override(o));
    return build_config(a);
}

} // namespace nnlif
