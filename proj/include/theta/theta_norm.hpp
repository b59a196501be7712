#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "theta/errors.hpp"
#include "theta/ideal.hpp"
#include "theta/sdp.hpp"
#include "theta/tensor.hpp"

namespace theta {

/// Solver failure surfaced by the norm routines; carries the final iterate's diagnostics.
class SolverError : public NumericalError {
public:
    SolverError(const std::string& what, Solution solution)
        : NumericalError(what), solution_(std::move(solution)) {}
    [[nodiscard]] const Solution& solution() const noexcept { return solution_; }

private:
    Solution solution_;
};

/// Tight settings used for exact comparisons (eps 1e-9).
SolverSettings precise_settings();

/// min t  s.t.  M_{B_k}(y) PSD, y_0 = t, degree-one coordinates equal to X.
/// Variables: z = (t, y over the basis beyond degree one).
ConeProgram norm_program(const MomentStructure& structure, const DenseTensor& X);

/// min t  s.t.  M_{B_k}(t, Z, y) PSD, Phi vec(Z) = b.
/// Variables: z = (t, vec(Z), y over the basis beyond degree one). Rank-deficient
/// measurement rows are compressed by an SVD first; inconsistent systems throw InputError.
ConeProgram minimize_program(const MomentStructure& structure, const Eigen::MatrixXd& phi, const Eigen::VectorXd& b);

/// min (tr W + tr Z) / 2  s.t.  [[W, X], [X^T, Z]] PSD. Variables: upper triangles of W then Z.
ConeProgram nuclear_program(const Eigen::MatrixXd& X);

struct NormResult {
    double value = 0.0;
    Solution solution;
};

/// Throws SolverError unless the solver reports Optimal.
NormResult theta_norm(const DenseTensor& X, const IdealSpec& spec, int k,
                      const SolverSettings& settings = precise_settings());

NormResult nuclear_norm_sdp(const Eigen::MatrixXd& X, const SolverSettings& settings = precise_settings());

struct MinimizeResult {
    DenseTensor Z;
    double t = 0.0;
    Solution solution;
};

/// Does not throw on solver failure: the status is reported in `solution`.
MinimizeResult theta_minimize(const Eigen::MatrixXd& phi, const Eigen::VectorXd& b, const IdealSpec& spec, int k,
                              const SolverSettings& settings = precise_settings(),
                              const std::optional<WarmStart>& warm = std::nullopt);

} // namespace theta
