#include "theta/theta_norm.hpp"

#include <map>
#include <sstream>

namespace theta {

SolverSettings precise_settings() {
    SolverSettings s;
    s.eps_abs = 1e-9;
    s.eps_rel = 1e-9;
    return s;
}

namespace {

using Position = std::pair<std::uint32_t, std::uint32_t>;

SparseSym to_sparse(const std::map<Position, double>& entries) {
    SparseSym out;
    out.reserve(entries.size());
    for (const auto& [pos, value] : entries) {
        if (value != 0.0) {
            out.push_back({pos.first, pos.second, value});
        }
    }
    return out;
}

// Scatters the moment entries into per-variable coefficient matrices.
// `slot(l)` maps a basis position to a z index, or -1 when the coordinate is fixed to `fixed(l)`.
template <class Slot, class Fixed>
void scatter(const MomentStructure& structure, ConeProgram& p, Slot slot, Fixed fixed) {
    std::vector<std::map<Position, double>> coeffs(p.dim_z);
    std::map<Position, double> constant;
    for (const auto& entry : structure.entries) {
        const Position pos{entry.row, entry.col};
        for (const auto& [l, coef] : entry.form) {
            const double c = coef.get_d();
            const long idx = slot(l);
            if (idx >= 0) {
                coeffs[static_cast<std::size_t>(idx)][pos] += c;
            } else {
                constant[pos] += c * fixed(l);
            }
        }
    }
    p.F.resize(p.dim_z);
    for (std::size_t i = 0; i < p.dim_z; ++i) {
        p.F[i] = to_sparse(coeffs[i]);
    }
    p.F0 = to_sparse(constant);
}

void check_dims(const MomentStructure& structure, std::size_t numel) {
    if (structure.num_linear() != numel) {
        throw InputError("tensor size does not match the moment structure");
    }
}

std::string diagnostics(const Solution& s) {
    std::ostringstream os;
    os << "solver status " << to_string(s.status) << " after " << s.iterations << " iterations: primal residual "
       << s.primal_residual << ", dual residual " << s.dual_residual << ", gap " << s.gap;
    return os.str();
}

} // namespace

ConeProgram norm_program(const MomentStructure& structure, const DenseTensor& X) {
    const std::size_t N = structure.num_linear();
    check_dims(structure, X.values().size());
    ConeProgram p;
    p.psd_dim = structure.dim;
    p.dim_z = 1 + structure.num_y() - 1 - N;
    p.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dim_z));
    p.c(0) = 1.0;
    p.A.resize(0, static_cast<Eigen::Index>(p.dim_z));
    p.b.resize(0);
    scatter(
        structure, p,
        [N](std::uint32_t l) -> long {
            if (l == 0) {
                return 0;
            }
            return l <= N ? -1 : static_cast<long>(l - N);
        },
        [&X](std::uint32_t l) { return X.values()[l - 1]; });
    return p;
}

ConeProgram minimize_program(const MomentStructure& structure, const Eigen::MatrixXd& phi, const Eigen::VectorXd& b) {
    const std::size_t N = structure.num_linear();
    if (static_cast<std::size_t>(phi.cols()) != N || phi.rows() != b.size()) {
        throw InputError("measurement map has the wrong shape");
    }
    if (!phi.allFinite() || !b.allFinite()) {
        throw InputError("measurement data must be finite");
    }
    ConeProgram p;
    p.psd_dim = structure.dim;
    p.dim_z = structure.num_y();
    p.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dim_z));
    p.c(0) = 1.0;
    scatter(
        structure, p, [](std::uint32_t l) { return static_cast<long>(l); }, [](std::uint32_t) { return 0.0; });

    // Compress Phi to an equivalent full-row-rank system.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-12 * std::max(1.0, sv(0)) * static_cast<double>(std::max(phi.rows(), phi.cols())) : 0.0;
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) {
        ++r;
    }
    const Eigen::MatrixXd U = svd.matrixU().leftCols(r);
    const Eigen::VectorXd b_red = U.transpose() * b;
    if ((U * b_red - b).norm() > 1e-8 * (1.0 + b.norm())) {
        throw InputError("measurement system is inconsistent");
    }
    p.A = Eigen::MatrixXd::Zero(r, static_cast<Eigen::Index>(p.dim_z));
    p.A.block(0, 1, r, static_cast<Eigen::Index>(N)) =
        sv.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    p.b = b_red;
    return p;
}

ConeProgram nuclear_program(const Eigen::MatrixXd& X) {
    if (!X.allFinite() || X.size() == 0) {
        throw InputError("nuclear norm needs a finite nonempty matrix");
    }
    const auto m = static_cast<std::uint32_t>(X.rows());
    const auto n = static_cast<std::uint32_t>(X.cols());
    ConeProgram p;
    p.psd_dim = m + n;
    p.dim_z = m * (m + 1) / 2 + n * (n + 1) / 2;
    p.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dim_z));
    p.A.resize(0, static_cast<Eigen::Index>(p.dim_z));
    p.b.resize(0);
    std::size_t idx = 0;
    auto block = [&](std::uint32_t offset, std::uint32_t size) {
        for (std::uint32_t i = 0; i < size; ++i) {
            for (std::uint32_t j = i; j < size; ++j) {
                p.F.push_back({{offset + i, offset + j, 1.0}});
                if (i == j) {
                    p.c(static_cast<Eigen::Index>(idx)) = 0.5;
                }
                ++idx;
            }
        }
    };
    block(0, m);
    block(m, n);
    for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            if (X(i, j) != 0.0) {
                p.F0.push_back({i, m + j, X(i, j)});
            }
        }
    }
    return p;
}

NormResult theta_norm(const DenseTensor& X, const IdealSpec& spec, int k, const SolverSettings& settings) {
    if (!(X.dims() == spec.dims)) {
        throw InputError("tensor dims " + X.dims().to_string() + " do not match " + spec.dims.to_string());
    }
    const auto structure = cached_moment_structure(spec, k);
    NormResult out;
    out.solution = solve(norm_program(*structure, X), settings);
    if (out.solution.status != SolveStatus::Optimal) {
        throw SolverError("theta norm: " + diagnostics(out.solution), out.solution);
    }
    out.value = out.solution.z(0);
    return out;
}

NormResult nuclear_norm_sdp(const Eigen::MatrixXd& X, const SolverSettings& settings) {
    NormResult out;
    out.solution = solve(nuclear_program(X), settings);
    if (out.solution.status != SolveStatus::Optimal) {
        throw SolverError("nuclear norm: " + diagnostics(out.solution), out.solution);
    }
    out.value = out.solution.objective_value;
    return out;
}

MinimizeResult theta_minimize(const Eigen::MatrixXd& phi, const Eigen::VectorXd& b, const IdealSpec& spec, int k,
                              const SolverSettings& settings, const std::optional<WarmStart>& warm) {
    const auto structure = cached_moment_structure(spec, k);
    const std::size_t N = structure->num_linear();
    MinimizeResult out;
    out.solution = solve(minimize_program(*structure, phi, b), settings, warm);
    out.t = out.solution.z(0);
    std::vector<double> values(N);
    for (std::size_t i = 0; i < N; ++i) {
        values[i] = out.solution.z(static_cast<Eigen::Index>(i + 1));
    }
    out.Z = DenseTensor(spec.dims, std::move(values));
    return out;
}

} // namespace theta
