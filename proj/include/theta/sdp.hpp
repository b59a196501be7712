#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace theta {

/// Symmetric matrix given by its upper-triangle nonzeros (row <= col).
struct SymEntry {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    double value = 0.0;
};
using SparseSym = std::vector<SymEntry>;

/// minimize c^T z  subject to  F(z) = F0 + sum_i z_i F_i  PSD,  A z = b.
struct ConeProgram {
    std::size_t dim_z = 0;
    std::size_t psd_dim = 0;
    Eigen::VectorXd c;
    SparseSym F0;
    std::vector<SparseSym> F; // one per entry of z
    Eigen::MatrixXd A;        // rows x dim_z (may have zero rows)
    Eigen::VectorXd b;

    /// Throws InputError on inconsistent sizes or out-of-range entries.
    void validate() const;
    [[nodiscard]] Eigen::MatrixXd eval_map(const Eigen::VectorXd& z) const; // F(z)
    [[nodiscard]] nlohmann::json to_json() const;
};

enum class SolverMethod { InteriorPoint, Admm };
enum class SolveStatus { Optimal, MaxIter, InfeasibleSuspected };
std::string to_string(SolveStatus status);

struct SolverSettings {
    SolverMethod method = SolverMethod::InteriorPoint;
    double eps_abs = 1e-8;
    double eps_rel = 1e-8;
    int max_iter = 200000;   // splitting iterations
    int max_ipm_iter = 100;  // interior-point iterations
    double rho = 1.0;        // splitting penalty
    double alpha = 1.6;      // over-relaxation
    int verbosity = 0;

    void validate() const;
};

struct WarmStart {
    Eigen::VectorXd z;
    Eigen::MatrixXd dual; // dual PSD matrix X
};

struct Solution {
    SolveStatus status = SolveStatus::MaxIter;
    Eigen::VectorXd z;
    Eigen::MatrixXd dual; // X, the multiplier of the PSD constraint
    double objective_value = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;   // ||F(z) - S|| for the PSD slack S (0 for a projected point)
    double equality_residual = 0.0; // ||A z - b||
    double dual_residual = 0.0;
    double gap = 0.0;
    double lambda_min = 0.0; // smallest eigenvalue of F(z), computed post hoc
    int iterations = 0;
    double seconds = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Frobenius-nearest PSD matrix (negative eigenvalues clamped to zero).
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& S);

Solution solve(const ConeProgram& program, const SolverSettings& settings = {},
               const std::optional<WarmStart>& warm = std::nullopt);

} // namespace theta
