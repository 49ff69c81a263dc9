// experiment.hpp: JSON experiment configs and the commands behind the CLI:
// trajectory, superop, sweep (checkpointed), verify, dump-spectrum.

#pragma once

#include "sysbath/channel.hpp"
#include "sysbath/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sysbath {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitCheckFailed = 2, kExitIo = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AlphaMode {
    Absolute,        // α as listed
    PerSqrtSigma,    // α = a · σ^{-1/2}
    TimesSqrtSigma,  // α = a · σ^{1/2}, i.e. the list holds α/√σ
};

struct ExperimentConfig {
    std::string model = "tfim";  // tfim | hubbard | annni | random
    int L = 2;
    double J = 1.0, g = 1.2;                   // tfim
    double hopping = 1.0, interaction = -4.0;  // hubbard t, U
    double J1 = 2.0, J2 = 0.6, Gamma = 0.2;    // annni
    std::string coupling;                      // pauli | fermionic; empty → model default
    double beta = 1.0;
    std::string bath_init;  // thermal | ground; empty → ground iff beta = inf
    std::vector<double> alpha_list;
    AlphaMode alpha_mode = AlphaMode::Absolute;
    std::vector<double> sigma_list;
    double T_factor = 5.0;
    double omega_lo = 0.0, omega_hi = 5.0;
    int n_iter = 100;
    Mode mode = Mode::Exact;
    double dt_divisor = 100.0;
    int omega_nodes = 64;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string initial = "maximally_mixed";  // maximally_mixed | zero
    bool override_time_policy = false;
    bool dump_spectra = false;
    int verify_nodes = 24;
    int verify_omega_nodes = 16;
    bool verify_corrupt_gamma = false;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

struct GridPoint {
    std::size_t index = 0;
    std::size_t alpha_index = 0;
    std::size_t sigma_index = 0;
    double alpha = 0;
    double sigma = 0;
    std::uint64_t seed = 0;
};

// σ outer, α inner; seeds derived from (config seed, point index).
std::vector<GridPoint> grid_points(const ExperimentConfig& config);

HamiltonianModel build_model(const ExperimentConfig& config);
CouplingSet build_coupling(const ExperimentConfig& config);
ChannelParams point_params(const ExperimentConfig& config, const GridPoint& point, int threads = 1);
Operator initial_state(const ExperimentConfig& config, Eigen::Index d);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool resume = false;
    int stop_after = -1;  // sweep: stop after this many new points (interruption hook)
};

// Each returns an exit code and throws ConfigError / IoError on those failures.
int cmd_trajectory(ExperimentConfig config, const RunOptions& options);
int cmd_superop(ExperimentConfig config, const RunOptions& options);
int cmd_sweep(ExperimentConfig config, const RunOptions& options);
int cmd_verify(ExperimentConfig config, const RunOptions& options);
int cmd_dump_spectrum(ExperimentConfig config, const RunOptions& options);

// Loads the config, dispatches, and maps exceptions to exit codes with a diagnostic on stderr.
int run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options);

std::string format_double(double x);

}  // namespace sysbath
