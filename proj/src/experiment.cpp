// experiment.cpp: Config parsing and the CLI commands.

#include "sysbath/experiment.hpp"

#include "sysbath/dyson.hpp"
#include "sysbath/manifest.hpp"
#include "sysbath/parallel.hpp"
#include "sysbath/superop.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>

namespace sysbath {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// config

namespace {

const std::set<std::string> kKeys = {
    "model", "L", "J", "g", "t", "U", "J1", "J2", "Gamma", "coupling", "beta", "bath_init", "alpha_list", "alpha_mode",
    "sigma_list", "T_factor", "omega_interval", "n_iter", "mode", "dt_divisor", "omega_nodes", "seed", "out_dir",
    "initial", "override_time_policy", "dump_spectra", "verify_nodes", "verify_omega_nodes", "verify_corrupt_gamma"};

std::string alpha_mode_name(AlphaMode m) {
    switch (m) {
        case AlphaMode::Absolute: return "absolute";
        case AlphaMode::PerSqrtSigma: return "per_sqrt_sigma";
        case AlphaMode::TimesSqrtSigma: return "times_sqrt_sigma";
    }
    return "?";
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

double parse_beta(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        throw ConfigError("config key 'beta': expected a number or \"inf\"");
    }
    if (!v.is_number()) throw ConfigError("config key 'beta': expected a number or \"inf\"");
    return v.get<double>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");

    ExperimentConfig c;
    read(j, "model", c.model);
    read(j, "L", c.L);
    read(j, "J", c.J);
    read(j, "g", c.g);
    read(j, "t", c.hopping);
    read(j, "U", c.interaction);
    read(j, "J1", c.J1);
    read(j, "J2", c.J2);
    read(j, "Gamma", c.Gamma);
    read(j, "coupling", c.coupling);
    if (j.contains("beta")) c.beta = parse_beta(j.at("beta"));
    read(j, "bath_init", c.bath_init);
    read(j, "alpha_list", c.alpha_list);
    if (j.contains("alpha_mode")) {
        std::string m;
        read(j, "alpha_mode", m);
        if (m == "absolute") c.alpha_mode = AlphaMode::Absolute;
        else if (m == "per_sqrt_sigma") c.alpha_mode = AlphaMode::PerSqrtSigma;
        else if (m == "times_sqrt_sigma") c.alpha_mode = AlphaMode::TimesSqrtSigma;
        else throw ConfigError("config key 'alpha_mode': unknown value '" + m + "'");
    }
    read(j, "sigma_list", c.sigma_list);
    read(j, "T_factor", c.T_factor);
    if (j.contains("omega_interval")) {
        std::vector<double> w;
        read(j, "omega_interval", w);
        if (w.size() != 2) throw ConfigError("config key 'omega_interval': expected [lo, hi]");
        c.omega_lo = w[0];
        c.omega_hi = w[1];
    }
    read(j, "n_iter", c.n_iter);
    if (j.contains("mode")) {
        std::string m;
        read(j, "mode", m);
        try {
            c.mode = parse_mode(m);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config key 'mode': ") + e.what());
        }
    }
    read(j, "dt_divisor", c.dt_divisor);
    read(j, "omega_nodes", c.omega_nodes);
    read(j, "seed", c.seed);
    read(j, "out_dir", c.out_dir);
    read(j, "initial", c.initial);
    read(j, "override_time_policy", c.override_time_policy);
    read(j, "dump_spectra", c.dump_spectra);
    read(j, "verify_nodes", c.verify_nodes);
    read(j, "verify_omega_nodes", c.verify_omega_nodes);
    read(j, "verify_corrupt_gamma", c.verify_corrupt_gamma);
    c.validate();
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    j["model"] = model;
    j["L"] = L;
    j["J"] = J;
    j["g"] = g;
    j["t"] = hopping;
    j["U"] = interaction;
    j["J1"] = J1;
    j["J2"] = J2;
    j["Gamma"] = Gamma;
    j["coupling"] = coupling;
    j["beta"] = std::isinf(beta) ? json("inf") : json(beta);
    j["bath_init"] = bath_init;
    j["alpha_list"] = alpha_list;
    j["alpha_mode"] = alpha_mode_name(alpha_mode);
    j["sigma_list"] = sigma_list;
    j["T_factor"] = T_factor;
    j["omega_interval"] = {omega_lo, omega_hi};
    j["n_iter"] = n_iter;
    j["mode"] = to_string(mode);
    j["dt_divisor"] = dt_divisor;
    j["omega_nodes"] = omega_nodes;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["initial"] = initial;
    j["override_time_policy"] = override_time_policy;
    j["dump_spectra"] = dump_spectra;
    j["verify_nodes"] = verify_nodes;
    j["verify_omega_nodes"] = verify_omega_nodes;
    j["verify_corrupt_gamma"] = verify_corrupt_gamma;
    return j;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (model != "tfim" && model != "hubbard" && model != "annni" && model != "random")
        fail("model must be one of tfim, hubbard, annni, random");
    const int qubits = model == "hubbard" ? 2 * L : L;
    if (L < 1) fail("L must be >= 1");
    if (qubits > 10) fail("model exceeds 10 qubits");
    if (!coupling.empty() && coupling != "pauli" && coupling != "fermionic") fail("coupling must be pauli or fermionic");
    if (coupling == "fermionic" && model != "hubbard") fail("fermionic coupling requires the hubbard model");
    if (!(beta >= 0)) fail("beta must be >= 0 or \"inf\"");
    if (!bath_init.empty() && bath_init != "thermal" && bath_init != "ground") fail("bath_init must be thermal or ground");
    if (alpha_list.empty()) fail("alpha_list must be non-empty");
    if (sigma_list.empty()) fail("sigma_list must be non-empty");
    for (double a : alpha_list)
        if (!(a > 0) || !std::isfinite(a)) fail("alpha_list values must be > 0");
    for (double s : sigma_list)
        if (!(s > 0) || !std::isfinite(s)) fail("sigma_list values must be > 0");
    if (!(T_factor >= 0)) fail("T_factor must be >= 0");
    if (!(omega_hi > omega_lo)) fail("omega_interval must satisfy lo < hi");
    if (n_iter < 0) fail("n_iter must be >= 0");
    if (!(dt_divisor > 0)) fail("dt_divisor must be > 0");
    if (omega_nodes < 1) fail("omega_nodes must be >= 1");
    if (initial != "maximally_mixed" && initial != "zero") fail("initial must be maximally_mixed or zero");
    if (mode == Mode::Pure) {
        const bool ground = bath_init == "ground" || (bath_init.empty() && std::isinf(beta));
        if (!ground) fail("pure mode requires a ground-state bath (beta = inf or bath_init = ground)");
        if (initial != "zero") fail("pure mode needs a pure initial state (initial = zero)");
    }
    if (!override_time_policy) {
        if (T_factor < 5.0) fail("T_factor < 5 requires override_time_policy");
        if (dt_divisor < 50.0) fail("dt_divisor < 50 requires override_time_policy");
    }
    if (verify_nodes < 8) fail("verify_nodes must be >= 8");
    if (verify_omega_nodes < 1) fail("verify_omega_nodes must be >= 1");
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

std::vector<GridPoint> grid_points(const ExperimentConfig& c) {
    std::vector<GridPoint> out;
    for (std::size_t si = 0; si < c.sigma_list.size(); ++si) {
        for (std::size_t ai = 0; ai < c.alpha_list.size(); ++ai) {
            GridPoint p;
            p.index = out.size();
            p.alpha_index = ai;
            p.sigma_index = si;
            p.sigma = c.sigma_list[si];
            const double a = c.alpha_list[ai];
            switch (c.alpha_mode) {
                case AlphaMode::Absolute: p.alpha = a; break;
                case AlphaMode::PerSqrtSigma: p.alpha = a / std::sqrt(p.sigma); break;
                case AlphaMode::TimesSqrtSigma: p.alpha = a * std::sqrt(p.sigma); break;
            }
            p.seed = derive_seed(c.seed, p.index);
            out.push_back(p);
        }
    }
    return out;
}

HamiltonianModel build_model(const ExperimentConfig& c) {
    if (c.model == "tfim") return build_tfim(c.L, c.J, c.g);
    if (c.model == "hubbard") return build_hubbard(c.L, c.hopping, c.interaction);
    if (c.model == "annni") return build_annni(c.L, c.J1, c.J2, c.Gamma);
    // random: Hermitian with uniform entries, scaled to unit operator norm
    const Eigen::Index d = Eigen::Index(1) << c.L;
    Rng rng(derive_seed(c.seed, 0xC0FFEE));
    Operator m(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) m(i, j) = Complex(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
    Operator h = (m + m.adjoint()) / 2.0;
    h /= operator_norm(h);
    return {h, "random", c.L, c.L};
}

CouplingSet build_coupling(const ExperimentConfig& c) {
    const std::string kind = c.coupling.empty() ? (c.model == "hubbard" ? "fermionic" : "pauli") : c.coupling;
    if (kind == "fermionic") return fermionic_coupling_set(c.L);
    return pauli_coupling_set(c.model == "hubbard" ? 2 * c.L : c.L);
}

ChannelParams point_params(const ExperimentConfig& c, const GridPoint& point, int threads) {
    ChannelParams p = ChannelParams::standard(point.alpha, point.sigma, c.beta, build_coupling(c), c.T_factor,
                                              c.dt_divisor);
    p.omega_lo = c.omega_lo;
    p.omega_hi = c.omega_hi;
    p.omega_nodes = c.omega_nodes;
    if (c.bath_init == "ground") p.bath_init = BathInit::Ground;
    else if (c.bath_init == "thermal") p.bath_init = BathInit::Thermal;
    p.override_time_policy = c.override_time_policy;
    p.threads = threads;
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

Operator initial_state(const ExperimentConfig& c, Eigen::Index d) {
    if (c.initial == "zero") {
        Operator psi = Operator::Zero(d, 1);
        psi(0, 0) = 1;
        return c.mode == Mode::Pure ? psi : Operator(psi * psi.adjoint());
    }
    return Operator::Identity(d, d) / static_cast<double>(d);
}

// ---------------------------------------------------------------------------
// shared plumbing

namespace {

struct Prepared {
    ExperimentConfig config;
    fs::path out;
    HamiltonianModel model;
    TargetState target;
    std::vector<GridPoint> points;
};

Prepared prepare(ExperimentConfig config, const RunOptions& options, bool need_target = true) {
    if (options.seed) config.seed = *options.seed;
    if (options.out_dir) config.out_dir = options.out_dir->string();
    config.validate();
    Prepared p;
    p.out = config.out_dir;
    p.model = build_model(config);
    if (need_target) {
        try {
            p.target = target_state(p.model, config.beta);
        } catch (const DegenerateGroundState& e) {
            throw ConfigError(std::string("target state: ") + e.what());
        }
    }
    p.points = grid_points(config);
    p.config = std::move(config);
    std::error_code ec;
    fs::create_directories(p.out, ec);
    if (ec) throw IoError("cannot create output directory " + p.out.string() + ": " + ec.message());
    return p;
}

json point_json(const GridPoint& pt, const ChannelParams& params) {
    return {{"index", pt.index},     {"alpha", pt.alpha}, {"sqrt2_alpha", std::sqrt(2.0) * pt.alpha},
            {"sigma", pt.sigma},     {"T", params.T},     {"dt", params.dt},
            {"seed", pt.seed}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
    std::ostringstream os;
    os << "iter,fidelity,infidelity,energy,trace,a_index,omega\n";
    for (const auto& r : rec.rows) {
        os << r.iter << ',' << format_double(r.fidelity) << ',' << format_double(1.0 - r.fidelity) << ','
           << format_double(r.energy) << ',' << format_double(r.trace) << ',' << r.a_index << ','
           << format_double(r.omega) << '\n';
    }
    return os.str();
}

std::string point_file(const char* stem, std::size_t index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_p%03zu.%s", stem, index, ext);
    return buf;
}

// Removes files written so far if the command fails part-way.
class OutputGuard {
public:
    explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {}
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) fs::remove(dir_ / f, ec);
    }
    void add(const fs::path& rel) { files_.push_back(rel); }
    const std::vector<fs::path>& files() const { return files_; }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
    bool committed_ = false;
};

void finish_manifest(const Prepared& p, const std::string& command, const json& points, const std::string& started,
                     OutputGuard& guard) {
    Manifest m;
    m.command = command;
    m.config = p.config.to_json();
    m.points = points;
    m.started_at = started;
    m.finished_at = utc_timestamp();
    m.files = guard.files();
    try {
        write_manifest(p.out, m);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    guard.commit();
}

void write_complex_binary(const fs::path& path, const Operator& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double re = m(i, j).real(), im = m(i, j).imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof re);
            out.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// trajectory

int cmd_trajectory(ExperimentConfig config, const RunOptions& options) {
    const std::string started = utc_timestamp();
    Prepared p = prepare(std::move(config), options);
    OutputGuard guard(p.out);
    json points = json::array();
    const Operator init = initial_state(p.config, p.model.dim());
    for (const auto& pt : p.points) {
        const ChannelParams params = point_params(p.config, pt, options.threads);
        const auto rec = run_iterations(init, p.config.n_iter, p.config.mode, params, p.model, p.target, pt.seed);
        const auto name = point_file("trajectory", pt.index, "csv");
        guard.add(name);
        write_text(p.out / name, trajectory_csv(rec));
        json pj = point_json(pt, params);
        pj["file"] = name;
        points.push_back(pj);
    }
    finish_manifest(p, "trajectory", points, started, guard);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// superop

namespace {

struct SuperopRow {
    GridPoint pt;
    double gap = 0;
    double infidelity = std::numeric_limits<double>::quiet_NaN();
    double trace_distance = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    double mixing_estimate = std::numeric_limits<double>::infinity();
    bool non_unique = false;
    bool mixing = false;
    StateVector eigenvalues;
};

SuperopRow analyse_point(const Prepared& p, const GridPoint& pt, int threads, SuperoperatorMatrix* keep = nullptr) {
    const ChannelParams params = point_params(p.config, pt, threads);
    SuperoperatorMatrix s = build_superoperator(params, p.model);
    SuperopRow row;
    row.pt = pt;
    try {
        const auto rep = spectral_report(s, p.target);
        row.gap = rep.gap;
        row.infidelity = rep.infidelity;
        row.trace_distance = rep.trace_distance;
        row.residual = rep.residual;
        row.mixing_estimate = rep.mixing_estimate;
        row.mixing = rep.mixing;
        row.eigenvalues = rep.eigenvalues;
    } catch (const NonUniqueFixedPoint& e) {
        row.non_unique = true;
        row.gap = std::max(0.0, e.gap);
        row.mixing = false;
        row.eigenvalues = e.eigenvalues;
    }
    if (keep) *keep = std::move(s);
    return row;
}

json eigen_json(const StateVector& ev, Eigen::Index limit) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < std::min(limit, ev.size()); ++i) arr.push_back({ev(i).real(), ev(i).imag()});
    return arr;
}

}  // namespace

int cmd_superop(ExperimentConfig config, const RunOptions& options) {
    const std::string started = utc_timestamp();
    Prepared p = prepare(std::move(config), options);
    if (p.model.qubits > 5) throw ConfigError("superop: at most 5 system qubits");
    OutputGuard guard(p.out);
    std::ostringstream csv;
    csv << "point,alpha,sqrt2_alpha,sigma,alpha_over_sqrt_sigma,gap,gap_over_alpha2,fixed_point_infidelity,"
           "trace_distance,residual,mixing_estimate,non_unique,mixing\n";
    json report = json::array();
    json points = json::array();
    for (const auto& pt : p.points) {
        const auto row = analyse_point(p, pt, options.threads);
        csv << pt.index << ',' << format_double(pt.alpha) << ',' << format_double(std::sqrt(2.0) * pt.alpha) << ','
            << format_double(pt.sigma) << ',' << format_double(pt.alpha / std::sqrt(pt.sigma)) << ','
            << format_double(row.gap) << ',' << format_double(row.gap / (pt.alpha * pt.alpha)) << ','
            << format_double(row.infidelity) << ',' << format_double(row.trace_distance) << ','
            << format_double(row.residual) << ',' << format_double(row.mixing_estimate) << ',' << int(row.non_unique)
            << ',' << int(row.mixing) << '\n';
        json r = {{"point", pt.index},
                  {"alpha", pt.alpha},
                  {"sigma", pt.sigma},
                  {"gap", row.gap},
                  {"fixed_point_infidelity", format_double(row.infidelity)},
                  {"trace_distance", format_double(row.trace_distance)},
                  {"residual", format_double(row.residual)},
                  {"mixing_estimate", format_double(row.mixing_estimate)},
                  {"non_unique_fixed_point", row.non_unique},
                  {"mixing", row.mixing},
                  {"leading_eigenvalues", eigen_json(row.eigenvalues, 8)}};
        if (p.config.dump_spectra) {
            const auto name = point_file("spectrum", pt.index, "bin");
            guard.add(name);
            write_complex_binary(p.out / name, Operator(row.eigenvalues));
            r["spectrum_file"] = name;
        }
        report.push_back(r);
        points.push_back(point_json(pt, point_params(p.config, pt)));
    }
    guard.add("superop.csv");
    write_text(p.out / "superop.csv", csv.str());
    guard.add("superop_report.json");
    write_text(p.out / "superop_report.json", json({{"vectorization", "column-stacking"}, {"rows", report}}).dump(2) + "\n");
    finish_manifest(p, "superop", points, started, guard);
    return kExitOk;
}

int cmd_dump_spectrum(ExperimentConfig config, const RunOptions& options) {
    const std::string started = utc_timestamp();
    Prepared p = prepare(std::move(config), options);
    if (p.model.qubits > 5) throw ConfigError("dump-spectrum: at most 5 system qubits");
    OutputGuard guard(p.out);
    json points = json::array();
    for (const auto& pt : p.points) {
        SuperoperatorMatrix s;
        const auto row = analyse_point(p, pt, options.threads, &s);
        const auto mat = point_file("superop", pt.index, "bin");
        const auto spec = point_file("spectrum", pt.index, "bin");
        const auto side = point_file("superop", pt.index, "json");
        guard.add(mat);
        write_complex_binary(p.out / mat, s.matrix);
        guard.add(spec);
        write_complex_binary(p.out / spec, Operator(row.eigenvalues));
        json sidecar = {{"alpha", pt.alpha},
                        {"sigma", pt.sigma},
                        {"d", s.d},
                        {"superoperator", {{"file", mat}, {"shape", {s.matrix.rows(), s.matrix.cols()}}}},
                        {"spectrum", {{"file", spec}, {"length", row.eigenvalues.size()}, {"order", "descending modulus"}}},
                        {"dtype", "complex128"},
                        {"layout", "row-major"},
                        {"vectorization", "column-stacking"},
                        {"gap", row.gap},
                        {"non_unique_fixed_point", row.non_unique}};
        guard.add(side);
        write_text(p.out / side, sidecar.dump(2) + "\n");
        points.push_back(point_json(pt, point_params(p.config, pt)));
    }
    finish_manifest(p, "dump-spectrum", points, started, guard);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

struct SweepResult {
    std::size_t index = 0;
    std::string sha256;
    double final_fidelity = 0;
    double final_energy = 0;
};

std::string config_hash(const ExperimentConfig& c) {
    json j = c.to_json();
    j.erase("out_dir");
    return sha256_bytes(j.dump());
}

}  // namespace

int cmd_sweep(ExperimentConfig config, const RunOptions& options) {
    const std::string started = utc_timestamp();
    Prepared p = prepare(std::move(config), options);
    const fs::path ckpt_path = p.out / "sweep_checkpoint.json";
    const std::string hash = config_hash(p.config);
    const std::string clear_hint = "; delete " + ckpt_path.string() + " (or the output directory) and rerun";

    std::map<std::size_t, SweepResult> done;
    if (options.resume && fs::exists(ckpt_path)) {
        json ck;
        try {
            std::ifstream in(ckpt_path);
            in >> ck;
            if (ck.at("config_hash").get<std::string>() != hash)
                throw IoError("checkpoint belongs to a different config" + clear_hint);
            for (const auto& e : ck.at("completed")) {
                SweepResult r;
                r.index = e.at("index").get<std::size_t>();
                r.sha256 = e.at("sha256").get<std::string>();
                r.final_fidelity = e.at("final_fidelity").get<double>();
                r.final_energy = e.at("final_energy").get<double>();
                if (r.index >= p.points.size()) throw IoError("checkpoint point index out of range" + clear_hint);
                const auto file = p.out / point_file("sweep", r.index, "csv");
                if (!fs::exists(file) || sha256_file(file) != r.sha256)
                    throw IoError("checkpoint does not match " + file.string() + clear_hint);
                done[r.index] = r;
            }
        } catch (const json::exception& e) {
            throw IoError(std::string("corrupt checkpoint: ") + e.what() + clear_hint);
        }
    }

    std::vector<GridPoint> todo;
    for (const auto& pt : p.points)
        if (!done.count(pt.index)) todo.push_back(pt);
    bool interrupted = false;
    if (options.stop_after >= 0 && static_cast<std::size_t>(options.stop_after) < todo.size()) {
        todo.resize(static_cast<std::size_t>(options.stop_after));
        interrupted = true;
    }

    std::mutex ckpt_mutex;
    auto save_checkpoint = [&] {
        json ck;
        ck["config_hash"] = hash;
        ck["completed"] = json::array();
        for (const auto& [idx, r] : done)
            ck["completed"].push_back({{"index", idx},
                                       {"sha256", r.sha256},
                                       {"final_fidelity", r.final_fidelity},
                                       {"final_energy", r.final_energy}});
        const fs::path tmp = ckpt_path.string() + ".tmp";
        write_text(tmp, ck.dump(2) + "\n");
        fs::rename(tmp, ckpt_path);
    };
    if (!options.resume) {
        std::error_code ec;
        fs::remove(ckpt_path, ec);
    }

    const Operator init = initial_state(p.config, p.model.dim());
    parallel_for(todo.size(), options.threads, [&](std::size_t i) {
        const auto& pt = todo[i];
        const ChannelParams params = point_params(p.config, pt, 1);
        const auto rec = run_iterations(init, p.config.n_iter, p.config.mode, params, p.model, p.target, pt.seed);
        const auto file = p.out / point_file("sweep", pt.index, "csv");
        write_text(file, trajectory_csv(rec));
        SweepResult r;
        r.index = pt.index;
        r.sha256 = sha256_file(file);
        r.final_fidelity = rec.rows.back().fidelity;
        r.final_energy = rec.rows.back().energy;
        std::lock_guard<std::mutex> lock(ckpt_mutex);
        done[pt.index] = r;
        save_checkpoint();
    });
    if (interrupted) {
        std::cerr << "sweep: stopped after " << options.stop_after << " new point(s); rerun with --resume\n";
        return kExitOk;
    }

    OutputGuard guard(p.out);
    std::ostringstream csv;
    csv << "point,alpha,sigma,alpha_over_sqrt_sigma,seed,final_fidelity,final_infidelity,final_energy,target_energy,"
           "energy_error\n";
    json points = json::array();
    for (const auto& pt : p.points) {
        const auto& r = done.at(pt.index);
        csv << pt.index << ',' << format_double(pt.alpha) << ',' << format_double(pt.sigma) << ','
            << format_double(pt.alpha / std::sqrt(pt.sigma)) << ',' << pt.seed << ','
            << format_double(r.final_fidelity) << ',' << format_double(1.0 - r.final_fidelity) << ','
            << format_double(r.final_energy) << ',' << format_double(p.target.energy) << ','
            << format_double(std::abs(r.final_energy - p.target.energy)) << '\n';
        guard.add(point_file("sweep", pt.index, "csv"));
        json pj = point_json(pt, point_params(p.config, pt));
        pj["file"] = point_file("sweep", pt.index, "csv");
        points.push_back(pj);
    }
    guard.add("sweep_summary.csv");
    write_text(p.out / "sweep_summary.csv", csv.str());
    finish_manifest(p, "sweep", points, started, guard);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(ExperimentConfig config, const RunOptions& options) {
    const std::string started = utc_timestamp();
    Prepared p = prepare(std::move(config), options, /*need_target=*/false);
    const auto& c = p.config;
    const CouplingSet coupling = build_coupling(c);
    const double sigma = c.sigma_list.front();
    const double beta = std::isinf(c.beta) ? 1.0 : c.beta;
    const int nodes = c.verify_nodes;
    Rng rng(derive_seed(c.seed, 0x5EED));
    json checks = json::array();
    bool all_pass = true;
    auto record = [&](const std::string& name, double value, double bound, bool pass, json evidence = json::object()) {
        checks.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}, {"evidence", evidence}});
        all_pass = all_pass && pass;
    };

    {  // F_{k,A†}(−ω) = G_{k,A}(ω)
        double worst = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const Operator& a = coupling.members[rng.index(coupling.size())];
            const double omega = c.omega_hi * (2 * rng.uniform() - 1);
            for (int k = 1; k <= 2; ++k) {
                const auto g = compute_G(k, a, p.model, omega, sigma, kInfiniteT, nodes);
                const auto f = compute_F(k, Operator(a.adjoint()), p.model, -omega, sigma, kInfiniteT, nodes);
                worst = std::max(worst, operator_norm(f.op - g.op));
            }
        }
        record("fg_adjoint_relation", worst, 1e-8, worst <= 1e-8);
    }
    {  // ‖G_k‖ ≤ (∫f)^k / k!
        const double T = c.T_factor * sigma;
        double worst_margin = -std::numeric_limits<double>::infinity();
        json ev = json::array();
        for (int k = 1; k <= 3; ++k) {
            const double bound = std::pow(profile_integral(sigma, T), k) / std::tgamma(k + 1.0);
            for (double omega : {0.0, 1.0, 3.0}) {
                const auto g = compute_G(k, coupling.members.front(), p.model, omega, sigma, T, nodes);
                const double norm = operator_norm(g.op);
                worst_margin = std::max(worst_margin, norm - bound);
                ev.push_back({{"k", k}, {"omega", omega}, {"norm", norm}, {"bound", bound}});
            }
        }
        record("g_norm_bound", worst_margin, 1e-8, worst_margin <= 1e-8, ev);
    }
    {  // avoid detailed balance, with a refinement ladder
        AvoidDbOptions opt;
        opt.omega_lo = c.omega_lo;
        opt.omega_hi = c.omega_hi;
        opt.omega_nodes = c.verify_omega_nodes;
        opt.corrupt_gamma = c.verify_corrupt_gamma;
        opt.threads = options.threads;
        json ladder = json::array();
        std::vector<double> values;
        for (int n : {8, 16, nodes}) {
            if (!values.empty() && n <= ladder.back()["nodes"].get<int>()) continue;
            const double r = avoid_db_residual(p.model, coupling, beta, sigma, n, opt);
            values.push_back(r);
            ladder.push_back({{"nodes", n}, {"residual", r}});
        }
        bool monotone = true;
        for (std::size_t i = 1; i < values.size(); ++i)
            monotone = monotone && (values[i] <= values[i - 1] || values[i] <= 1e-12);
        const double r = values.back();
        record("avoid_db", r, 1e-5, r <= 1e-5 && monotone,
               {{"ladder", ladder}, {"monotone", monotone}, {"corrupt_gamma", c.verify_corrupt_gamma}});
    }
    for (int k = 1; k <= 2; ++k) {
        const double omega = 1.3;
        const double d = conjugation_identity_check(k, coupling.members.front(), p.model, omega, beta, sigma, nodes);
        record("conjugation_k" + std::to_string(k), d, 1e-5, d <= 1e-5, {{"omega", omega}, {"beta", beta}});
    }
    {  // multivariable Fourier bound
        int violations = 0, trials = 0;
        double worst_ratio = 0;
        for (double s : {1.0, 2.0}) {
            for (int n = 1; n <= 3; ++n) {
                for (int t = 0; t < 100; ++t) {
                    std::vector<double> alphas(static_cast<std::size_t>(n));
                    for (auto& a : alphas) a = 4 * rng.uniform() - 2;
                    const auto r = multifourier_bound_check(alphas, s, nodes);
                    ++trials;
                    if (!r.holds()) ++violations;
                    worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
                }
            }
        }
        record("multifourier_bound", violations, 0, violations == 0, {{"trials", trials}, {"max_lhs_over_rhs", worst_ratio}});
        const double a = 0.3;
        const auto r = multifourier_bound_check({a}, sigma, nodes);
        const double closed = profile_integral(sigma, kInfiniteT) * std::exp(-sigma * sigma * a * a);
        const double err = std::abs(r.lhs - closed);
        record("multifourier_closed_form", err, 1e-8, err <= 1e-8, {{"lhs", r.lhs}, {"closed_form", closed}});
    }
    {  // order-α² correction is traceless
        GridPoint pt;
        pt.alpha = 0.01;
        pt.sigma = sigma;
        ExperimentConfig cc = c;
        cc.omega_nodes = c.verify_omega_nodes;
        ChannelParams params = point_params(cc, pt, options.threads);
        params.beta = beta;
        params.bath_init = BathInit::Thermal;
        const DysonOrder2 dyson(params, p.model, nodes);
        const Eigen::Index d = p.model.dim();
        const double tr = std::abs(dyson.correction(Operator::Identity(d, d) / double(d)).trace());
        record("dyson_trace_preservation", tr, 1e-8, tr <= 1e-8);
    }

    OutputGuard guard(p.out);
    guard.add("verify.json");
    write_text(p.out / "verify.json",
               json({{"model", p.model.label}, {"sigma", sigma}, {"beta", beta}, {"nodes", nodes}, {"all_pass", all_pass},
                     {"checks", checks}})
                       .dump(2) +
                   "\n");
    finish_manifest(p, "verify", json::array(), started, guard);
    for (const auto& ch : checks)
        std::cout << (ch["pass"].get<bool>() ? "PASS " : "FAIL ") << ch["name"].get<std::string>() << "  value="
                  << ch["value"] << "  bound=" << ch["bound"] << "\n";
    return all_pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& command, const fs::path& config_path, const RunOptions& options) {
    try {
        ExperimentConfig config = load_config(config_path);
        if (command == "trajectory") return cmd_trajectory(config, options);
        if (command == "superop") return cmd_superop(config, options);
        if (command == "sweep") return cmd_sweep(config, options);
        if (command == "verify") return cmd_verify(config, options);
        if (command == "dump-spectrum") return cmd_dump_spectrum(config, options);
        std::cerr << "error: unknown command '" << command << "'\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitCheckFailed;
    }
}

}  // namespace sysbath
