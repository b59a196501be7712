#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "theta/ideal.hpp"
#include "theta/sdp.hpp"
#include "theta/tensor.hpp"

namespace theta {

/// Linear map R^{n1 x ... x nd} -> R^m; row k applied to vec(X) equals <X, Phi_k>.
struct MeasurementMap {
    int m = 0;
    Dims dims;
    Eigen::MatrixXd rows; // m x numel

    [[nodiscard]] Eigen::VectorXd apply(const DenseTensor& X) const;
};

/// i.i.d. N(0, 1/m) entries. Resamples (deterministically) on the measure-zero event
/// that the map is rank deficient.
MeasurementMap gaussian_map(const Dims& dims, int m, std::uint64_t seed);

struct ExperimentConfig {
    Dims dims;
    int rank = 1;
    std::vector<int> m_values;
    int trials = 200;
    std::uint64_t seed = 0;
    double threshold = 1e-6;
    int k = 1;
    TensorFormat format = TensorFormat::Full;
    SolverSettings solver;
    int threads = 0; // 0: THETA_THREADS or the hardware concurrency

    void validate() const;
};

/// Default experiment settings: eps 1e-9 so that 1e-6 elementwise errors are resolvable.
SolverSettings recovery_settings();

/// Parses comma-separated counts and ranges: "11..30", "4,8,12", "4..8,17".
std::vector<int> parse_m_list(const std::string& text);

struct TrialOutcome {
    int m = 0;
    int trial = 0;
    double error = 0.0; // max elementwise |Z - X0|
    bool success = false;
    std::string tag;    // empty, or "solver:<status>" / "error:<what>" for failed solves
    double seconds = 0.0;
};

struct MeasurementRecord {
    int m = 0;
    int successes = 0;
    int trials = 0;
    int solver_failures = 0;
    double success_rate = 0.0;
    double median_error = 0.0;
    double mean_seconds = 0.0;
};

struct RecoveryStats {
    Dims dims;
    int rank = 1;
    std::vector<MeasurementRecord> records; // ascending m
    std::optional<int> m0;                  // largest m with no successes
    std::optional<int> m1;                  // smallest m with all successes
    std::vector<TrialOutcome> trials;       // every trial, ordered by (m, trial)

    [[nodiscard]] nlohmann::json summary_json() const;
    [[nodiscard]] std::string csv() const;
};

/// Trial (m, t) draws its ground truth and map from streams derived from (seed, m, t),
/// so the results do not depend on the thread count.
TrialOutcome run_trial(const ExperimentConfig& cfg, int m, int trial);
RecoveryStats run_experiment(const ExperimentConfig& cfg);

int default_thread_count();

/// Runs the experiment and writes phase.csv and summary.json under `out_dir`.
RecoveryStats phase_table(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

} // namespace theta
