#include "nnlif/run.hpp"

#include "nnlif/errors.hpp"
#include "nnlif/freeboundary.hpp"
#include "nnlif/timescale.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace nnlif {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalIntegrityError("sha256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

Emitter::Emitter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void Emitter::write(const std::string& rel, const std::string& content) {
    const fs::path p = dir_ / rel;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << content;
    f.close();
    files_.push_back(rel);
    hashes_.push_back(sha256_hex(content));
    sizes_.push_back(content.size());
}

void Emitter::finish(const std::string& subcommand, const RunConfig& cfg, bool ok, const std::string& message) {
    json m;
    m["subcommand"] = subcommand;
    m["status"] = ok ? "ok" : "failed";
    if (!cfg.preset.empty()) m["preset"] = cfg.preset;
    json a = json::array();
    for (const auto& [k, v] : cfg.assignments) a.push_back({k, v});
    m["assignments"] = a;
    json files = json::array();
    for (size_t i = 0; i < files_.size(); ++i)
        files.push_back({{"path", files_[i]}, {"sha256", hashes_[i]}, {"bytes", sizes_[i]}});
    m["files"] = files;
    if (!ok) {
        m["error"] = message;
        std::ofstream f(dir_ / "FAILED", std::ios::binary);
        f << message << '\n';
    } else if (fs::exists(dir_ / "FAILED")) {
        fs::remove(dir_ / "FAILED");
    }
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << m.dump(2) << '\n';
}

Grid grid_for(const RunConfig& cfg) {
    return build_grid(cfg.params, cfg.grid.n, cfg.grid.tail_tolerance, cfg.grid.v_min);
}

namespace {

DensityProfile read_profile_csv(const std::string& path, const Grid& grid) {
    std::ifstream f(path);
    if (!f) throw ConfigError("initial.path: cannot open '" + path + "'");
    std::string line;
    std::vector<double> vs, ps;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("v,p", 0) == 0) continue;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("initial.path: line " + std::to_string(lineno) + " is not v,p");
        const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        char* ea = nullptr;
        char* eb = nullptr;
        const double v = std::strtod(a.c_str(), &ea);
        const double p = std::strtod(b.c_str(), &eb);
        if (ea == a.c_str() || *ea != '\0' || eb == b.c_str() || (*eb != '\0' && *eb != '\r'))
            throw ConfigError("initial.path: line " + std::to_string(lineno) + " is not numeric");
        vs.push_back(v);
        ps.push_back(p);
        if (vs.size() > 1 && !(vs.back() > vs[vs.size() - 2]))
            throw ConfigError("initial.path: voltages must increase");
    }
    if (vs.size() < 2) throw ConfigError("initial.path: needs at least two rows");
    auto f_interp = [&](double v) {
        if (v < vs.front() || v > vs.back()) return 0.0;
        const size_t j = static_cast<size_t>(std::upper_bound(vs.begin(), vs.end(), v) - vs.begin());
        if (j >= vs.size()) return ps.back();
        const size_t i = j - 1;
        const double w = (v - vs[i]) / (vs[j] - vs[i]);
        return (1.0 - w) * ps[i] + w * ps[j];
    };
    return project_function(f_interp, grid, true);
}

std::string csv_of(const DensityProfile& p) {
    std::ostringstream os;
    write_profile_csv(os, p);
    return os.str();
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_series(Emitter& e, const TauTrajectory& tr, double c) {
    std::ostringstream s;
    write_series_csv(s, tr);
    e.write("series.csv", s.str());

    const TimeMap m = forward_time(tr, c);
    std::ostringstream t;
    t << "t,N,mass\n";
    for (size_t k = 0; k < tr.tau.size(); ++k)
        t << format_number(m.ts[k]) << ',' << invert_tilde_n(tr.tilde_n[k], c).to_string() << ','
          << format_number(tr.mass[k]) << '\n';
    e.write("t_series.csv", t.str());
}

void write_snapshots(Emitter& e, const TauTrajectory& tr, double c) {
    const TimeMap m = forward_time(tr, c);
    std::ostringstream idx;
    idx << "index,tau,t,file\n";
    for (const auto& s : tr.snapshots) {
        char name[64];
        std::snprintf(name, sizeof name, "profiles/snapshot_%08d.csv", s.index);
        e.write(name, csv_of(s.profile));
        idx << s.index << ',' << format_number(s.tau) << ',' << format_number(m.t_at(s.tau)) << ',' << name << '\n';
    }
    e.write("snapshots.csv", idx.str());
}

json run_summary(const TauTrajectory& tr, const Grid& g, double c) {
    const Lifespan L = lifespan(tr, c);
    double mass_dev = 0.0;
    for (double x : tr.mass) mass_dev = std::max(mass_dev, std::fabs(x - tr.mass.front()));
    return {{"T_star", L.T_star},
            {"lifespan_status", to_string(L.status)},
            {"tail_increment", L.tail_increment},
            {"v_min", g.v_min},
            {"h", g.h},
            {"n", g.n},
            {"scheme", to_string(tr.cfg.scheme)},
            {"c", c},
            {"steps", tr.tau.size() - 1},
            {"max_mass_deviation", mass_dev},
            {"clamp_mass_total", tr.clamp_mass_total},
            {"min_pre_clamp", tr.min_pre_clamp},
            {"reported_slopes", tr.reported_slopes}};
}

void cmd_simulate(const RunConfig& cfg, Emitter& e) {
    const Grid g = grid_for(cfg);
    const DensityProfile p0 = initial_profile(cfg, g);
    const TauTrajectory tr = run_tau(p0, cfg.params, cfg.dil, cfg.stepper);
    write_series(e, tr, cfg.dil.c);
    write_snapshots(e, tr, cfg.dil.c);
    json s = run_summary(tr, g, cfg.dil.c);
    s["events"] = detect_blowups(tr, cfg.stepper.blowup_epsilon).size();
    e.write("summary.json", s.dump(2) + "\n");
}

void cmd_steady(const RunConfig& cfg, Emitter& e) {
    const Grid g = grid_for(cfg);
    const SteadyState s = steady_state(cfg.params, g);
    e.write("steady_profile.csv", csv_of(s.profile));
    json j{{"regime", to_string(s.regime)}, {"Z", num(s.Z)}, {"M_inf", s.M_inf}, {"mass", total_mass(s.profile)}};
    e.write("steady.json", j.dump(2) + "\n");
}

void cmd_jump(const RunConfig& cfg, Emitter& e) {
    const Grid g = grid_for(cfg);
    const DensityProfile p0 = initial_profile(cfg, g);
    const TauTrajectory tr = run_tau(p0, cfg.params, cfg.dil, cfg.stepper);
    write_series(e, tr, cfg.dil.c);
    const auto events = detect_blowups(tr, cfg.stepper.blowup_epsilon);

    std::ostringstream lines;
    int k = 0;
    for (const auto& ev : events) {
        const JumpCheck jc = verify_jump(tr, ev, cfg.params);
        json j{{"tau1", ev.tau1},
               {"tau2", ev.tau2},
               {"t_star", ev.t_star},
               {"delta_tau", ev.delta_tau},
               {"l1_gap", jc.l1_gap},
               {"terminated", ev.terminated},
               {"delta_tau_independent", jc.delta_tau_independent},
               {"flux_recovered", jc.flux_recovered}};
        lines << j.dump() << '\n';
        char name[64];
        std::snprintf(name, sizeof name, "jump_%03d_before.csv", k);
        e.write(name, csv_of(tr.snapshot_at_index(ev.index1)->profile));
        std::snprintf(name, sizeof name, "jump_%03d_after.csv", k);
        e.write(name, csv_of(tr.snapshot_at_index(ev.index2)->profile));
        ++k;
    }
    e.write("events.jsonl", lines.str());

    const TimeMap m = forward_time(tr, cfg.dil.c);
    const double T = m.ts.back();
    const int samples = 400;
    std::ostringstream gs;
    gs << "t,N,mass\n";
    for (int i = 0; i < samples; ++i) {
        const double t = T * static_cast<double>(i) / samples;
        const GeneralizedSample smp = sample_generalized(tr, m, t);
        gs << format_number(t) << ',' << smp.N.to_string() << ',' << format_number(total_mass(smp.profile)) << '\n';
    }
    e.write("generalized.csv", gs.str());
}

void cmd_entropy(const RunConfig& cfg, Emitter& e) {
    const Grid g = grid_for(cfg);
    const SteadyState s = steady_state(cfg.params, g);
    const DensityProfile p0 = initial_profile(cfg, g);
    const bool limit = cfg.options.entropy_limit;
    if (!limit && std::fabs(cfg.dil.a_c) > 1e-14)
        throw ConfigError("dilation.c must be 'working' (a0/a1) for entropy.equation = nonlinear");

    EntropyReport rep;
    rep.G = cfg.options.entropy_G;
    rep.min_dissipation = std::numeric_limits<double>::infinity();
    RunHooks hooks;
    hooks.observer = [&](const StepView& v) {
        rep.rows.push_back(entropy_row(v.profile, s, rep.G, cfg.params, cfg.dil, v.tilde_n, v.tau));
        rep.min_dissipation = std::min(rep.min_dissipation, rep.rows.back().D);
    };
    StepperConfig sc = cfg.stepper;
    sc.snapshot_stride = std::max(sc.snapshot_stride, static_cast<int>(std::ceil(sc.horizon / sc.dtau)));
    if (limit)
        run_limit_equation(p0, cfg.params, sc, hooks);
    else
        run_tau(p0, cfg.params, cfg.dil, sc, hooks);

    std::ostringstream os;
    write_entropy_csv(os, rep);
    e.write("entropy.csv", os.str());

    std::vector<double> tau, S;
    for (const auto& r : rep.rows) {
        tau.push_back(r.tau);
        S.push_back(r.S);
    }
    json j{{"G", to_string(rep.G)}, {"equation", limit ? "limit" : "nonlinear"}, {"min_dissipation", rep.min_dissipation}};
    try {
        j["decay_rate"] = fit_decay_rate(tau, S);
    } catch (const DomainError&) {
        j["decay_rate"] = nullptr;
    }
    if (s.regime != Regime::Inhibitory) j["control_nu_epsilon"] = num(control_nu_epsilon(rep, s.M_inf));
    e.write("entropy.json", j.dump(2) + "\n");
}

void cmd_fb_check(const RunConfig& cfg, Emitter& e) {
    const Grid g = grid_for(cfg);
    const DensityProfile p0 = initial_profile(cfg, g);
    const double c = cfg.dil.c;
    const TauTrajectory tr = run_tau(p0, cfg.params, cfg.dil, cfg.stepper);
    const TransformCheck tc = cross_check_transform(tr, cfg.params, c);

    std::ostringstream os;
    os << "s,gamma,beta,D,ell,ell_R\n";
    for (size_t k = 0; k < tc.states.size(); ++k) {
        const GammaState& st = tc.states[k];
        os << format_number(st.s) << ',' << format_number(st.gamma) << ',' << format_number(st.beta) << ','
           << format_number(st.D) << ',' << format_number(tc.path.ell[k]) << ',' << format_number(tc.path.ell_R[k])
           << '\n';
    }
    e.write("fb_check.csv", os.str());

    const FreeBoundaryBounds B = free_boundary_bounds(cfg.params, c);
    json j{{"beta_gap", tc.beta_gap},
           {"lipschitz_max", tc.path.lipschitz_max},
           {"lipschitz_bound", 2.0 * B.lipschitz},
           {"bounds_ok", tc.bounds_ok && tc.path.lipschitz_max <= 2.0 * B.lipschitz},
           {"F_max", B.F_max},
           {"D_max", B.D_max},
           {"v_shift", tc.v_shift}};

    if (cfg.options.fb_volterra) {
        const VolterraResult vr = volterra_M(p0, cfg.params, c, cfg.options.fb_sigma, cfg.options.fb_intervals);
        std::ostringstream vs;
        vs << "s,M_volterra,M_tau\n";
        double diff = 0.0;
        bool covered = true;
        for (size_t k = 0; k < vr.s.size(); ++k) {
            const bool in_range = vr.s[k] <= tc.s.back();
            covered = covered && in_range;
            const double mt = in_range ? transformed_flux_at(tc, vr.s[k]) : std::nan("");
            if (in_range) diff = std::max(diff, std::fabs(mt - vr.M[k]));
            vs << format_number(vr.s[k]) << ',' << format_number(vr.M[k]) << ','
               << (in_range ? format_number(mt) : std::string("nan")) << '\n';
        }
        e.write("volterra.csv", vs.str());
        j["volterra"] = {{"sigma", vr.sigma},       {"halvings", vr.halvings}, {"iterations", vr.iterations},
                         {"max_ratio", vr.max_ratio}, {"max_diff", diff},      {"covered", covered}};
    }
    e.write("fb_check.json", j.dump(2) + "\n");
}

void cmd_poincare(const RunConfig& cfg, Emitter& e) {
    const auto& o = cfg.options;
    double alpha = 0.0;
    std::string id;
    int n = o.poincare_n;
    if (o.poincare_weight == PoincareWeight::Steady) {
        RunConfig c2 = cfg;
        c2.grid.n = n;
        const SteadyState s = steady_state(cfg.params, grid_for(c2));
        alpha = poincare_constant(s.profile);
        id = "steady";
    } else {
        const bool decay = o.poincare_weight == PoincareWeight::Decay;
        const double X = o.poincare_length.value_or(decay ? 40.0 : 1.0);
        const double h = X / n;
        std::vector<double> w(static_cast<size_t>(n) + 1, 1.0);
        if (decay)
            for (int i = 0; i <= n; ++i) {
                const double x = i * h;
                w[static_cast<size_t>(i)] = std::min(x, std::exp(-x));
            }
        alpha = poincare_constant(w, h);
        id = decay ? "decay" : "constant";
    }
    json j{{"alpha", alpha}, {"n", n}, {"weight_id", id}};
    e.write("poincare.json", j.dump(2) + "\n");
}

void dispatch(const RunConfig& cfg, const std::string& sub, Emitter& e) {
    if (sub == "simulate")
        cmd_simulate(cfg, e);
    else if (sub == "steady")
        cmd_steady(cfg, e);
    else if (sub == "jump")
        cmd_jump(cfg, e);
    else if (sub == "entropy")
        cmd_entropy(cfg, e);
    else if (sub == "fb-check")
        cmd_fb_check(cfg, e);
    else if (sub == "poincare")
        cmd_poincare(cfg, e);
    else
        throw ConfigError("unknown subcommand '" + sub + "'");
}

int classify(const std::exception_ptr& ep, std::string& message) {
    try {
        std::rethrow_exception(ep);
    } catch (const ValidationError& ex) {
        message = ex.what();
        return 1;
    } catch (const NumericalError& ex) {
        message = ex.what();
        return 2;
    } catch (const std::exception& ex) {
        message = ex.what();
        return 2;
    }
}

int run_single(const RunConfig& cfg, const std::string& sub, const fs::path& dir, std::ostream& log,
               std::mutex& log_mutex) {
    Emitter e(dir);
    std::string message;
    int code = 0;
    try {
        dispatch(cfg, sub, e);
    } catch (...) {
        code = classify(std::current_exception(), message);
    }
    e.finish(sub, cfg, code == 0, message);
    if (code != 0) {
        std::lock_guard<std::mutex> lk(log_mutex);
        log << "nnlif " << sub << " [" << dir.string() << "]: " << message << '\n';
    }
    return code;
}

int run_sweep(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    const auto& axes = cfg.options.sweep_axes;
    if (axes.empty()) throw ConfigError("sweep needs at least one sweep.<key> = v1, v2, ... entry");

    Assignments base;
    for (const auto& kv : cfg.assignments)
        if (kv.first.rfind("sweep.", 0) != 0) base.push_back(kv);

    std::vector<RunConfig> runs;
    std::vector<std::vector<std::string>> combos;
    size_t total = 1;
    for (const auto& ax : axes) total *= ax.second.size();
    for (size_t r = 0; r < total; ++r) {
        Assignments a = base;
        std::vector<std::string> values(axes.size());
        size_t rest = r;
        for (size_t d = axes.size(); d-- > 0;) {
            values[d] = axes[d].second[rest % axes[d].second.size()];
            rest /= axes[d].second.size();
        }
        for (size_t d = 0; d < axes.size(); ++d) a.emplace_back(axes[d].first, values[d]);
        runs.push_back(build_config(a));
        combos.push_back(values);
    }

    Emitter top(dir);
    std::vector<int> codes(runs.size(), 0);
    std::atomic<size_t> next{0};
    std::mutex log_mutex;
    const int workers = std::max(1, std::min<int>(sweep_threads(), static_cast<int>(runs.size())));
    auto worker = [&] {
        for (size_t i = next++; i < runs.size(); i = next++) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu", i);
            codes[i] = run_single(runs[i], cfg.options.sweep_command, dir / name, log, log_mutex);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream idxcsv;
    idxcsv << "run";
    for (const auto& ax : axes) idxcsv << ',' << ax.first;
    idxcsv << ",exit_code\n";
    int worst = 0;
    for (size_t i = 0; i < runs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu", i);
        idxcsv << name;
        for (const auto& v : combos[i]) idxcsv << ',' << v;
        idxcsv << ',' << codes[i] << '\n';
        worst = std::max(worst, codes[i]);
    }
    top.write("sweep.csv", idxcsv.str());
    top.finish("sweep", cfg, worst == 0, worst == 0 ? "" : "one or more sweep runs failed");
    return worst;
}

} // namespace

DensityProfile initial_profile(const RunConfig& cfg, const Grid& grid) {
    const InitialSpec& in = cfg.initial;
    switch (in.kind) {
    case InitialKind::Gaussian: {
        const double c = in.center, var = in.variance;
        return project_function([&](double v) { return std::exp(-(v - c) * (v - c) / (2.0 * var)); }, grid, true);
    }
    case InitialKind::SteadyExcitatory:
    case InitialKind::SteadyInhibitory: {
        const SteadyState s = in.kind == InitialKind::SteadyExcitatory ? steady_excitatory(cfg.params, grid)
                                                                        : steady_inhibitory(cfg.params, grid);
        const double eps = in.perturbation;
        return project_function(
            [&](double v) { return s.value(v) * (1.0 + eps * std::cos(M_PI * v) * std::exp(-v * v)); }, grid, true);
    }
    case InitialKind::FromCSV:
        return read_profile_csv(in.path, grid);
    }
    throw ConfigError("initial.kind: unsupported");
}

std::vector<std::string> subcommands() { return {"simulate", "steady", "jump", "entropy", "fb-check", "poincare", "sweep"}; }

int sweep_threads() {
    if (const char* env = std::getenv("NNLIF_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_scenario(const RunConfig& cfg, const std::string& subcommand, const std::string& out_dir, std::ostream& log) {
    std::mutex log_mutex;
    if (subcommand != "sweep") return run_single(cfg, subcommand, out_dir, log, log_mutex);
    try {
        return run_sweep(cfg, out_dir, log);
    } catch (...) {
        std::string message;
        const int code = classify(std::current_exception(), message);
        Emitter e(out_dir);
        e.finish("sweep", cfg, false, message);
        log << "nnlif sweep: " << message << '\n';
        return code;
    }
}

} // namespace nnlif
