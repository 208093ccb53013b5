#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tdf/dynamics.hpp"
#include "tdf/io.hpp"

namespace tdf {

enum class Method { hartree, dlra };

/// Validated contents of an evolve configuration file.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    /// "identity", "kronecker-laplacian", "random-symmetric" or "file"
    std::string problem = "identity";
    std::filesystem::path operator_file;
    std::vector<Index> shape;
    std::vector<Index> rank;
    double p = 2.0;
    std::vector<Vector> weights; ///< empty for unit weights
    Method method = Method::dlra;
    double T = 1.0;
    double dt = 0.01;
    Projector projector = Projector::hilbert;
    ProjectionOptions projection;
    /// "tucker" (random minimal Tucker of the configured rank, unit norm), "random"
    /// (Gaussian dense tensor) or "file"
    std::string initial = "tucker";
    std::filesystem::path initial_file;
    bool reference = true;
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
    bool dump_states = false;
};

/// Parses and validates a configuration; relative file paths are resolved
/// against `base_dir`. Throws FormatError on any invalid entry.
ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = {});

struct Problem {
    KroneckerSumOperator A;
    DenseTensor u0;
    /// exact flow or a fine full-space RK4 solve
    Reference reference;
};

Problem build_problem(const ExperimentConfig& cfg);

/// Per-mode generators when A = sum_k I (x) .. (x) A_k (x) .. (x) I.
std::optional<std::vector<Matrix>> kronecker_sum_generators(const KroneckerSumOperator& A);

struct RunResult {
    TrajectoryRecord record;
    json summary;
};

/// One integration with the step size of `cfg`.
RunResult run_experiment(const ExperimentConfig& cfg, const Problem& problem);

/// Runs `levels` >= 3 integrations at dt, dt/2, ... and reports the observed
/// order from self-convergence of the three finest terminal states.
json dt_sweep(const ExperimentConfig& cfg, const Problem& problem, int levels);

} // namespace tdf
