#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sfe/models.hpp"

namespace sfe::cli {

enum class Suite { modified, bowen, tau, quotient };

const char* to_string(Suite s);

// Invalid configuration; the message starts with the offending field path.
class config_error : public std::runtime_error {
public:
    config_error(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct VerifySettings {
    std::size_t triples = 2000;
    std::size_t graph_nodes = 500;
    std::size_t semiconjugation_points = 200;
    double semiconjugation_horizon = 20 * 3.141592653589793;
    double residual_tol = 1e-7;
    double metric_tol = 1e-6;
};

struct ExperimentConfig {
    std::string model = "annulus";
    ModelParams params;
    std::vector<Suite> suites;  // duplicates removed, in canonical order
    std::vector<double> eps_path;
    std::vector<double> delta_path;
    double rho = 0.0;
    std::vector<double> schedule;
    std::vector<double> resolution_path;
    std::optional<std::size_t> section_points;  // doubling-suspension only
    std::optional<std::pair<double, double>> window;
    std::uint64_t seed = 0;
    bool jitter = false;
    std::string output_dir = "sfe-out";
    int threads = 0;  // 0 keeps the OpenMP default
    double corrupt_jump = 0.0;  // fault injection: shift applied after each jump on the induced side
    double rate_gap_tol = 0.05;
    VerifySettings verify;

    bool has(Suite s) const;
};

// Parses YAML text. `source` names the input in messages.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Checks that need the model instance (rho against the impulse gap, model
// parameters, sampler compatibility).
void validate_against_model(const ExperimentConfig& cfg, const SemiflowSystem& sys);

}  // namespace sfe::cli
