#include "theta/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>

#include "theta/errors.hpp"

namespace theta {

std::string to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal:
        return "optimal";
    case SolveStatus::MaxIter:
        return "max_iter";
    case SolveStatus::InfeasibleSuspected:
        return "infeasible_suspected";
    }
    return "?";
}

void SolverSettings::validate() const {
    if (!(eps_abs > 0) || !(eps_rel > 0)) {
        throw InputError("solver tolerances must be positive");
    }
    if (max_iter < 1 || max_ipm_iter < 1) {
        throw InputError("iteration limits must be positive");
    }
    if (!(rho > 0) || !(alpha > 0 && alpha < 2)) {
        throw InputError("splitting parameters out of range");
    }
}

void ConeProgram::validate() const {
    if (static_cast<std::size_t>(c.size()) != dim_z || F.size() != dim_z) {
        throw InputError("cone program: objective or map length differs from dim_z");
    }
    if (A.rows() > 0 && static_cast<std::size_t>(A.cols()) != dim_z) {
        throw InputError("cone program: equality matrix has the wrong number of columns");
    }
    if (A.rows() != b.size()) {
        throw InputError("cone program: equality right-hand side has the wrong length");
    }
    auto check = [&](const SparseSym& m) {
        for (const auto& e : m) {
            if (e.row > e.col || e.col >= psd_dim) {
                throw InputError("cone program: matrix entry outside the upper triangle");
            }
            if (!std::isfinite(e.value)) {
                throw InputError("cone program: non-finite matrix entry");
            }
        }
    };
    check(F0);
    for (const auto& m : F) {
        check(m);
    }
    if (!c.allFinite() || !A.allFinite() || !b.allFinite()) {
        throw InputError("cone program: non-finite data");
    }
}

namespace {

void add_to(Eigen::MatrixXd& M, const SparseSym& s, double scale) {
    for (const auto& e : s) {
        M(e.row, e.col) += scale * e.value;
        if (e.row != e.col) {
            M(e.col, e.row) += scale * e.value;
        }
    }
}

// <F, M> with F symmetric given by its upper triangle.
double inner(const SparseSym& s, const Eigen::MatrixXd& M) {
    double sum = 0.0;
    for (const auto& e : s) {
        sum += e.row == e.col ? e.value * M(e.row, e.row) : e.value * (M(e.row, e.col) + M(e.col, e.row));
    }
    return sum;
}

double frob(const SparseSym& s) {
    double sum = 0.0;
    for (const auto& e : s) {
        sum += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
    }
    return std::sqrt(sum);
}

Eigen::VectorXd adjoint(const ConeProgram& p, const Eigen::MatrixXd& M) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(p.dim_z));
    for (std::size_t i = 0; i < p.dim_z; ++i) {
        out(static_cast<Eigen::Index>(i)) = inner(p.F[i], M);
    }
    return out;
}

Eigen::MatrixXd apply(const ConeProgram& p, const Eigen::VectorXd& z) {
    const auto n = static_cast<Eigen::Index>(p.psd_dim);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < p.dim_z; ++i) {
        const double zi = z(static_cast<Eigen::Index>(i));
        if (zi != 0.0) {
            add_to(out, p.F[i], zi);
        }
    }
    return out;
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& M) {
    return 0.5 * (M + M.transpose());
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge");
    }
    return es.eigenvalues()(0);
}

// Largest a with M + a dM PSD (infinity if unbounded); M must be positive definite.
double max_step(const Eigen::MatrixXd& M, const Eigen::MatrixXd& dM) {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
        return 0.0;
    }
    Eigen::MatrixXd W = llt.matrixL().solve(dM);
    W = llt.matrixL().solve(Eigen::MatrixXd(W.transpose()));
    const double lam = min_eigenvalue(sym(W));
    return lam >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lam;
}

struct Tolerance {
    double abs, rel;
    [[nodiscard]] double operator()(double scale) const { return abs + rel * scale; }
};

// Solves [H -A^T; A 0] [dz; dnu] = [r1; r2] given the Cholesky factor of H.
class KktSolver {
public:
    KktSolver(const Eigen::MatrixXd& H, const Eigen::MatrixXd& A) : A_(A) {
        factor(H);
        if (A.rows() > 0) {
            Y_ = llt_.solve(Eigen::MatrixXd(A.transpose()));
            Eigen::MatrixXd schur = A * Y_;
            schur_.compute(schur);
            if (schur_.info() != Eigen::Success) {
                const double shift = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
                schur.diagonal().array() += shift;
                schur_.compute(schur);
                if (schur_.info() != Eigen::Success) {
                    throw NumericalError("equality Schur complement is singular");
                }
            }
        }
    }

    void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dz, Eigen::VectorXd& dnu) const {
        const Eigen::VectorXd h = llt_.solve(r1);
        if (A_.rows() == 0) {
            dz = h;
            dnu.resize(0);
            return;
        }
        dnu = schur_.solve(r2 - A_ * h);
        dz = h + Y_ * dnu;
    }

private:
    void factor(Eigen::MatrixXd H) {
        llt_.compute(H);
        double shift = 1e-14 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        for (int attempt = 0; attempt < 8 && llt_.info() != Eigen::Success; ++attempt) {
            H.diagonal().array() += shift;
            shift *= 100.0;
            llt_.compute(H);
        }
        if (llt_.info() != Eigen::Success) {
            throw NumericalError("Schur matrix is not positive definite");
        }
    }

    const Eigen::MatrixXd& A_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::MatrixXd Y_;
    Eigen::LLT<Eigen::MatrixXd> schur_;
};

// Q = A*A in the trace inner product, from the sparse coefficient matrices.
Eigen::MatrixXd gram(const ConeProgram& p) {
    const auto nz = static_cast<Eigen::Index>(p.dim_z);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::pair<Eigen::Index, double>>> by_position;
    for (std::size_t i = 0; i < p.dim_z; ++i) {
        for (const auto& e : p.F[i]) {
            by_position[{e.row, e.col}].emplace_back(static_cast<Eigen::Index>(i), e.value);
        }
    }
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nz, nz);
    for (const auto& [pos, list] : by_position) {
        const double weight = pos.first == pos.second ? 1.0 : 2.0;
        for (const auto& [i, vi] : list) {
            for (const auto& [j, vj] : list) {
                Q(i, j) += weight * vi * vj;
            }
        }
    }
    return Q;
}

// Packed upper triangle with off-diagonals scaled by sqrt(2), so dot products match <A, B>.
Eigen::VectorXd svec(const Eigen::MatrixXd& M) {
    const Eigen::Index n = M.rows();
    Eigen::VectorXd v(n * (n + 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            v(k++) = i == j ? M(i, i) : std::sqrt(2.0) * 0.5 * (M(i, j) + M(j, i));
        }
    }
    return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, Eigen::Index n) {
    Eigen::MatrixXd M(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double value = i == j ? v(k) : v(k) / std::sqrt(2.0);
            M(i, j) = value;
            M(j, i) = value;
            ++k;
        }
    }
    return M;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Primal-dual path following with the HKM direction and Mehrotra's predictor-corrector.
// The PSD slack S = F(z) is kept as its own iterate; X is the dual PSD matrix.
Solution solve_ipm(const ConeProgram& p, const SolverSettings& s, const std::optional<WarmStart>& warm) {
    const auto start = Clock::now();
    const auto n = static_cast<Eigen::Index>(p.psd_dim);
    const auto nz = static_cast<Eigen::Index>(p.dim_z);
    const Tolerance tol{s.eps_abs, s.eps_rel};
    const double norm_f0 = frob(p.F0);
    const double norm_b = p.b.size() > 0 ? p.b.norm() : 0.0;
    const double norm_c = p.c.norm();

    Eigen::MatrixXd F0 = Eigen::MatrixXd::Zero(n, n);
    add_to(F0, p.F0, 1.0);

    const double xi = 10.0 * std::max({1.0, std::sqrt(static_cast<double>(n)), norm_f0,
                                       p.c.size() > 0 ? p.c.cwiseAbs().maxCoeff() : 0.0});
    Eigen::VectorXd z = Eigen::VectorXd::Zero(nz);
    Eigen::MatrixXd X = xi * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd S = xi * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(p.b.size());
    if (warm && warm->z.size() == nz) {
        z = warm->z;
    }
    if (warm && warm->dual.rows() == n && warm->dual.cols() == n && min_eigenvalue(warm->dual) > 0) {
        X = warm->dual;
    }

    Solution out;
    double best_merit = std::numeric_limits<double>::infinity();
    int stalled = 0;
    int iterations = 0;
    for (int iter = 0;; ++iter) {
        const Eigen::MatrixXd Fz = F0 + apply(p, z);
        const Eigen::MatrixXd Rp = Fz - S;
        const Eigen::VectorXd Ax = adjoint(p, X);
        const Eigen::VectorXd rd = p.c - Ax - (p.A.rows() > 0 ? Eigen::VectorXd(p.A.transpose() * nu)
                                                              : Eigen::VectorXd::Zero(nz));
        const Eigen::VectorXd re = p.b - (p.A.rows() > 0 ? Eigen::VectorXd(p.A * z) : Eigen::VectorXd());
        const double mu = (X.cwiseProduct(S)).sum() / static_cast<double>(n);
        const double pobj = p.c.dot(z);
        const double dobj = -(F0.cwiseProduct(X)).sum() + (p.b.size() > 0 ? p.b.dot(nu) : 0.0);

        Solution current;
        current.z = z;
        current.dual = X;
        current.objective_value = pobj;
        current.dual_objective = dobj;
        current.primal_residual = Rp.norm();
        current.equality_residual = re.size() > 0 ? re.norm() : 0.0;
        current.dual_residual = rd.norm();
        current.gap = std::abs(pobj - dobj);
        current.iterations = iter;
        const double obj_scale = std::max(std::abs(pobj), std::abs(dobj));
        // Worst ratio of a stopping quantity to its tolerance; converged when <= 1.
        const double merit = std::max({current.primal_residual / tol(std::max(norm_f0, S.norm())),
                                       current.equality_residual / tol(norm_b),
                                       current.dual_residual / tol(std::max(norm_c, Ax.norm())),
                                       current.gap / tol(obj_scale),
                                       mu * static_cast<double>(n) / tol(obj_scale)});
        if (iter == 0 || merit < best_merit) {
            best_merit = merit;
            out = current;
        }
        const bool converged = merit <= 1.0;
        iterations = iter;
        if (s.verbosity > 1) {
            std::cerr << "ipm " << iter << " pobj " << pobj << " dobj " << dobj << " pres " << current.primal_residual
                      << " eres " << current.equality_residual << " dres " << current.dual_residual << " mu " << mu
                      << '\n';
        }
        if (converged) {
            out = current;
            out.status = SolveStatus::Optimal;
            break;
        }
        if (X.norm() > 1e12 || S.norm() > 1e12 || z.norm() > 1e12) {
            out = current;
            out.status = SolveStatus::InfeasibleSuspected;
            break;
        }
        if (iter >= s.max_ipm_iter || stalled >= 3) {
            break;
        }

        Eigen::LLT<Eigen::MatrixXd> s_llt(S);
        if (s_llt.info() != Eigen::Success) {
            break;
        }
        const Eigen::MatrixXd Sinv = s_llt.solve(Eigen::MatrixXd::Identity(n, n));

        // Schur matrix H_ij = tr(F_i X F_j S^-1).
        Eigen::MatrixXd H(nz, nz);
        Eigen::MatrixXd G(n, n);
        for (Eigen::Index j = 0; j < nz; ++j) {
            G.setZero();
            for (const auto& e : p.F[static_cast<std::size_t>(j)]) {
                G.noalias() += e.value * X.col(e.row) * Sinv.row(e.col);
                if (e.row != e.col) {
                    G.noalias() += e.value * X.col(e.col) * Sinv.row(e.row);
                }
            }
            for (Eigen::Index i = 0; i < nz; ++i) {
                H(i, j) = inner(p.F[static_cast<std::size_t>(i)], G);
            }
        }
        H = sym(H);
        const KktSolver kkt(H, p.A);

        // M S^-1 through the Cholesky factor; more accurate than multiplying by the explicit inverse.
        auto right_solve = [&](const Eigen::MatrixXd& M) { return Eigen::MatrixXd(s_llt.solve(M.transpose()).transpose()); };
        const Eigen::MatrixXd XRpSinv = right_solve(X * Rp);
        const double dual_tol = tol(std::max(norm_c, Ax.norm()));
        // Correction in the metric of X = L L^T: dX -= L W L^T with W the least-norm matrix in
        // span{L^T F_i L} meeting the dual-equation error r. It is the smallest change relative
        // to X, so X stays positive. Solved by QR of the scaled columns, not normal equations,
        // because A* X A X is far too ill-conditioned near the boundary.
        std::optional<Eigen::HouseholderQR<Eigen::MatrixXd>> x_qr;
        Eigen::MatrixXd x_chol;
        const Eigen::Index packed = n * (n + 1) / 2;
        auto x_correct = [&](Eigen::MatrixXd& dX, const Eigen::VectorXd& r) {
            if (!x_qr) {
                const Eigen::LLT<Eigen::MatrixXd> x_llt(X);
                if (x_llt.info() != Eigen::Success) {
                    return false;
                }
                x_chol = x_llt.matrixL();
                Eigen::MatrixXd B(packed, nz);
                for (Eigen::Index j = 0; j < nz; ++j) {
                    G.setZero();
                    for (const auto& e : p.F[static_cast<std::size_t>(j)]) {
                        G.noalias() += e.value * x_chol.row(e.row).transpose() * x_chol.row(e.col);
                        if (e.row != e.col) {
                            G.noalias() += e.value * x_chol.row(e.col).transpose() * x_chol.row(e.row);
                        }
                    }
                    B.col(j) = svec(G);
                }
                x_qr.emplace(B);
            }
            const auto R = x_qr->matrixQR().topRows(nz).triangularView<Eigen::Upper>();
            Eigen::VectorXd y = Eigen::VectorXd::Zero(packed);
            y.head(nz) = R.transpose().solve(r);
            y = x_qr->householderQ() * y;
            dX -= sym(x_chol * smat(y, n) * x_chol.transpose());
            return true;
        };
        auto direction = [&](const Eigen::MatrixXd& K, Eigen::VectorXd& dz, Eigen::VectorXd& dnu, Eigen::MatrixXd& dS,
                             Eigen::MatrixXd& dX, double sigma_mu, const Eigen::MatrixXd* corr) {
            const Eigen::VectorXd rhs = adjoint(p, K) - rd;
            kkt.solve(rhs, re, dz, dnu);
            auto update = [&] {
                dS = Rp + apply(p, dz);
                Eigen::MatrixXd T = sigma_mu * Sinv - X - right_solve(X * dS);
                if (corr != nullptr) {
                    T -= *corr;
                }
                dX = sym(T);
            };
            update();
            // Iterative refinement against the unfactored operator; H is ill-conditioned near optimality.
            double last = std::numeric_limits<double>::infinity();
            for (int round = 0; round < 6; ++round) {
                Eigen::VectorXd r1 = adjoint(p, dX) - rd;
                Eigen::VectorXd r2 = re;
                if (p.A.rows() > 0) {
                    r1 += p.A.transpose() * dnu;
                    r2 -= p.A * dz;
                }
                const double size = r1.norm() + r2.norm();
                if (!(size < 0.5 * last)) {
                    break;
                }
                last = size;
                Eigen::VectorXd ez, enu;
                kkt.solve(r1, r2, ez, enu);
                dz += ez;
                if (dnu.size() > 0) {
                    dnu += enu;
                }
                update();
            }
            // Forming dX through S^-1 loses accuracy as S approaches singularity; remove the
            // remaining dual-equation error directly so the dual residual cannot drift.
            auto dual_error = [&] {
                Eigen::VectorXd r = adjoint(p, dX) - rd;
                if (p.A.rows() > 0) {
                    r += p.A.transpose() * dnu;
                }
                return r;
            };
            Eigen::VectorXd r1 = dual_error();
            const double before = r1.norm();
            for (int round = 0; round < 3 && r1.norm() > 1e-2 * dual_tol && x_correct(dX, r1); ++round) {
                r1 = dual_error();
            }
            if (s.verbosity > 2) {
                std::cerr << "    refinement residual " << last << " dual error " << before << " -> " << r1.norm()
                          << '\n';
            }
        };

        // Predictor.
        Eigen::VectorXd dz, dnu;
        Eigen::MatrixXd dS, dX;
        direction(-X - XRpSinv, dz, dnu, dS, dX, 0.0, nullptr);
        const double ap = std::min(1.0, max_step(S, dS));
        const double ad = std::min(1.0, max_step(X, dX));
        const double mu_aff = ((X + ad * dX).cwiseProduct(S + ap * dS)).sum() / static_cast<double>(n);
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // Corrector.
        const Eigen::MatrixXd corr = right_solve(dX * dS);
        direction(sigma * mu * Sinv - X - XRpSinv - corr, dz, dnu, dS, dX, sigma * mu, &corr);
        const double gamma = 0.98;
        const double step_p = std::min(1.0, gamma * max_step(S, dS));
        const double step_d = std::min(1.0, gamma * max_step(X, dX));
        if (s.verbosity > 2) {
            std::cerr << "    |X| " << X.norm() << " |S| " << S.norm() << " |Sinv| " << Sinv.norm() << " ap " << step_p
                      << " ad " << step_d << " sigma " << sigma << '\n';
        }
        if (step_p < 1e-10 && step_d < 1e-10) {
            ++stalled;
        } else {
            stalled = 0;
        }
        z += step_p * dz;
        S += step_p * dS;
        X += step_d * dX;
        if (nu.size() > 0) {
            nu += step_d * dnu;
        }
        S = sym(S);
        X = sym(X);
    }
    out.iterations = iterations;
    out.lambda_min = min_eigenvalue(F0 + apply(p, out.z));
    out.seconds = seconds_since(start);
    return out;
}

// Alternating directions on  min c^T z  s.t.  F(z) = S, S PSD, A z = b, with scaled dual U
// (X = -rho U) and residual-balancing updates of rho.
Solution solve_admm(const ConeProgram& p, const SolverSettings& s, const std::optional<WarmStart>& warm) {
    const auto start = Clock::now();
    const auto n = static_cast<Eigen::Index>(p.psd_dim);
    const auto nz = static_cast<Eigen::Index>(p.dim_z);
    const Tolerance tol{s.eps_abs, s.eps_rel};
    Eigen::MatrixXd F0 = Eigen::MatrixXd::Zero(n, n);
    add_to(F0, p.F0, 1.0);

    const Eigen::MatrixXd Q = gram(p);
    // rho Q z + A^T nu = rho A*(W) - c is solved as Q z - A^T nu' = A*(W) - c / rho.
    const KktSolver kkt(Q, p.A);

    double rho = s.rho;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(nz);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(p.b.size());
    if (warm && warm->z.size() == nz) {
        z = warm->z;
        S = psd_project(sym(F0 + apply(p, z)));
    }
    if (warm && warm->dual.rows() == n && warm->dual.cols() == n) {
        U = -warm->dual / rho;
    }

    Solution out;
    out.status = SolveStatus::MaxIter;
    for (int iter = 1; iter <= s.max_iter; ++iter) {
        const Eigen::MatrixXd W = S - F0 - U;
        Eigen::VectorXd dnu;
        kkt.solve(adjoint(p, W) - p.c / rho, p.b, z, dnu);
        nu = -rho * dnu;
        const Eigen::MatrixXd Fz = F0 + apply(p, z);
        const Eigen::MatrixXd relaxed = s.alpha * Fz + (1.0 - s.alpha) * S;
        const Eigen::MatrixXd S_old = S;
        S = psd_project(sym(relaxed + U));
        U += relaxed - S;

        if (iter % 10 == 0 || iter == s.max_iter) {
            const Eigen::MatrixXd X = -rho * U;
            out.z = z;
            out.dual = X;
            out.objective_value = p.c.dot(z);
            out.dual_objective = -(F0.cwiseProduct(X)).sum() + (p.b.size() > 0 ? p.b.dot(nu) : 0.0);
            out.primal_residual = (Fz - S).norm();
            out.equality_residual = p.A.rows() > 0 ? (p.A * z - p.b).norm() : 0.0;
            out.dual_residual = rho * adjoint(p, S - S_old).norm();
            out.gap = std::abs(out.objective_value - out.dual_objective);
            out.iterations = iter;
            const double scale = std::max(std::abs(out.objective_value), std::abs(out.dual_objective));
            const double prim_rel = out.primal_residual / tol(std::max(Fz.norm(), S.norm()));
            const double dual_rel = out.dual_residual / tol(std::max(p.c.norm(), adjoint(p, X).norm()));
            if (s.verbosity > 1 && iter % 1000 == 0) {
                std::cerr << "admm " << iter << " obj " << out.objective_value << " pres " << out.primal_residual
                          << " dres " << out.dual_residual << " gap " << out.gap << " rho " << rho << '\n';
            }
            if (prim_rel <= 1.0 && dual_rel <= 1.0 && out.gap <= tol(scale)) {
                out.status = SolveStatus::Optimal;
                break;
            }
            if (z.norm() > 1e12 || U.norm() > 1e12) {
                out.status = SolveStatus::InfeasibleSuspected;
                break;
            }
            if (iter % 100 == 0) {
                const double ratio = std::sqrt(prim_rel / std::max(dual_rel, 1e-300));
                if (ratio > 5.0 || ratio < 0.2) {
                    const double next = std::clamp(rho * ratio, 1e-6, 1e6);
                    U *= rho / next;
                    rho = next;
                }
            }
        }
    }
    out.lambda_min = min_eigenvalue(F0 + apply(p, out.z));
    out.seconds = seconds_since(start);
    return out;
}

} // namespace

Eigen::MatrixXd ConeProgram::eval_map(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd out = apply(*this, z);
    add_to(out, F0, 1.0);
    return out;
}

nlohmann::json ConeProgram::to_json() const {
    auto mat = [](const SparseSym& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& e : m) {
            rows.push_back({e.row, e.col, e.value});
        }
        return rows;
    };
    nlohmann::json doc;
    doc["format"] = "minimize c'z s.t. F0 + sum_i z_i F_i PSD, A z = b; matrices as upper-triangle [row, col, value]";
    doc["dim_z"] = dim_z;
    doc["psd_dim"] = psd_dim;
    doc["c"] = std::vector<double>(c.data(), c.data() + c.size());
    doc["F0"] = mat(F0);
    doc["F"] = nlohmann::json::array();
    for (const auto& m : F) {
        doc["F"].push_back(mat(m));
    }
    doc["A"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(A.cols()));
        for (Eigen::Index k = 0; k < A.cols(); ++k) {
            row[static_cast<std::size_t>(k)] = A(r, k);
        }
        doc["A"].push_back(row);
    }
    doc["b"] = std::vector<double>(b.data(), b.data() + b.size());
    return doc;
}

nlohmann::json Solution::to_json() const {
    return nlohmann::json{{"status", to_string(status)},
                          {"objective", objective_value},
                          {"dual_objective", dual_objective},
                          {"primal_residual", primal_residual},
                          {"equality_residual", equality_residual},
                          {"dual_residual", dual_residual},
                          {"gap", gap},
                          {"lambda_min", lambda_min},
                          {"iterations", iterations},
                          {"seconds", seconds}};
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& S) {
    if (S.rows() != S.cols()) {
        throw InputError("psd_project needs a square matrix");
    }
    if (!S.allFinite()) {
        throw InputError("psd_project: non-finite entries");
    }
    if (S.size() == 0) {
        return S;
    }
    const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, S.cwiseAbs().maxCoeff())) {
        throw InputError("psd_project: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) {
        throw NumericalError("psd_project: eigensolver did not converge for a " + std::to_string(S.rows()) + "x" +
                             std::to_string(S.cols()) + " matrix");
    }
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd& V = es.eigenvectors();
    return sym(V * lam.asDiagonal() * V.transpose());
}

namespace {

// Equality constraints are eliminated before solving: z = z_p + lift(w), where w
// parametrizes the null space of A over the columns A touches. Keeps the interior-point
// Schur system free of the ill-conditioned equality block.
struct Reduction {
    std::vector<Eigen::Index> free_cols;
    std::vector<Eigen::Index> cons_cols;
    Eigen::VectorXd zp;    // particular solution, zero on free columns
    Eigen::MatrixXd basis; // |cons_cols| x q, orthonormal null-space basis
    double offset = 0.0;   // c^T z_p
    double infeasibility = 0.0;
    ConeProgram reduced;

    explicit Reduction(const ConeProgram& p) {
        const auto nz = static_cast<Eigen::Index>(p.dim_z);
        for (Eigen::Index j = 0; j < nz; ++j) {
            (p.A.col(j).cwiseAbs().maxCoeff() > 0 ? cons_cols : free_cols).push_back(j);
        }
        const auto nc = static_cast<Eigen::Index>(cons_cols.size());
        Eigen::MatrixXd Ac(p.A.rows(), nc);
        for (Eigen::Index j = 0; j < nc; ++j) {
            Ac.col(j) = p.A.col(cons_cols[static_cast<std::size_t>(j)]);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ac, Eigen::ComputeThinU | Eigen::ComputeFullV);
        const Eigen::VectorXd& sv = svd.singularValues();
        const double cutoff = 1e-12 * static_cast<double>(std::max(Ac.rows(), Ac.cols())) * (sv.size() > 0 ? sv(0) : 0.0);
        Eigen::Index r = 0;
        while (r < sv.size() && sv(r) > cutoff) {
            ++r;
        }
        const Eigen::VectorXd coef = svd.matrixU().leftCols(r).transpose() * p.b;
        const Eigen::VectorXd zc = svd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal() * coef;
        infeasibility = (Ac * zc - p.b).norm();
        basis = svd.matrixV().rightCols(nc - r);
        zp = Eigen::VectorXd::Zero(nz);
        for (Eigen::Index j = 0; j < nc; ++j) {
            zp(cons_cols[static_cast<std::size_t>(j)]) = zc(j);
        }
        offset = p.c.dot(zp);

        const auto q = basis.cols();
        ConeProgram& out = reduced;
        out.psd_dim = p.psd_dim;
        out.dim_z = free_cols.size() + static_cast<std::size_t>(q);
        out.c.resize(static_cast<Eigen::Index>(out.dim_z));
        out.A.resize(0, static_cast<Eigen::Index>(out.dim_z));
        out.b.resize(0);
        for (std::size_t i = 0; i < free_cols.size(); ++i) {
            out.c(static_cast<Eigen::Index>(i)) = p.c(free_cols[i]);
            out.F.push_back(p.F[static_cast<std::size_t>(free_cols[i])]);
        }
        using Position = std::pair<std::uint32_t, std::uint32_t>;
        auto combine = [&](const SparseSym* base, auto weight) {
            std::map<Position, double> acc;
            if (base != nullptr) {
                for (const auto& e : *base) {
                    acc[{e.row, e.col}] += e.value;
                }
            }
            for (Eigen::Index j = 0; j < nc; ++j) {
                const double w = weight(j);
                if (w != 0.0) {
                    for (const auto& e : p.F[static_cast<std::size_t>(cons_cols[static_cast<std::size_t>(j)])]) {
                        acc[{e.row, e.col}] += w * e.value;
                    }
                }
            }
            SparseSym s;
            for (const auto& [pos, v] : acc) {
                if (v != 0.0) {
                    s.push_back({pos.first, pos.second, v});
                }
            }
            return s;
        };
        Eigen::VectorXd c_cons(nc);
        for (Eigen::Index j = 0; j < nc; ++j) {
            c_cons(j) = p.c(cons_cols[static_cast<std::size_t>(j)]);
        }
        for (Eigen::Index k = 0; k < q; ++k) {
            out.c(static_cast<Eigen::Index>(free_cols.size()) + k) = basis.col(k).dot(c_cons);
            out.F.push_back(combine(nullptr, [&](Eigen::Index j) { return basis(j, k); }));
        }
        out.F0 = combine(&p.F0, [&](Eigen::Index j) { return zc(j); });
    }

    [[nodiscard]] Eigen::VectorXd lift(const Eigen::VectorXd& w) const {
        Eigen::VectorXd z = zp;
        for (std::size_t i = 0; i < free_cols.size(); ++i) {
            z(free_cols[i]) = w(static_cast<Eigen::Index>(i));
        }
        const Eigen::VectorXd delta = basis * w.tail(basis.cols());
        for (std::size_t j = 0; j < cons_cols.size(); ++j) {
            z(cons_cols[j]) += delta(static_cast<Eigen::Index>(j));
        }
        return z;
    }

    [[nodiscard]] Eigen::VectorXd project(const Eigen::VectorXd& z) const {
        Eigen::VectorXd w(static_cast<Eigen::Index>(reduced.dim_z));
        for (std::size_t i = 0; i < free_cols.size(); ++i) {
            w(static_cast<Eigen::Index>(i)) = z(free_cols[i]);
        }
        Eigen::VectorXd dc(static_cast<Eigen::Index>(cons_cols.size()));
        for (std::size_t j = 0; j < cons_cols.size(); ++j) {
            dc(static_cast<Eigen::Index>(j)) = z(cons_cols[j]) - zp(cons_cols[j]);
        }
        w.tail(basis.cols()) = basis.transpose() * dc;
        return w;
    }
};

} // namespace

Solution solve(const ConeProgram& program, const SolverSettings& settings, const std::optional<WarmStart>& warm) {
    program.validate();
    settings.validate();
    if (program.dim_z == 0) {
        throw InputError("cone program has no variables");
    }
    auto run = [&](const ConeProgram& p, const std::optional<WarmStart>& w) {
        if (settings.method == SolverMethod::Admm) {
            return solve_admm(p, settings, w);
        }
        Solution ipm = solve_ipm(p, settings, w);
        if (ipm.status != SolveStatus::MaxIter) {
            return ipm;
        }
        // Degenerate programs can stall the interior-point method just short of the dual
        // tolerance; the splitting method, started from its best iterate, finishes the job.
        SolverSettings polish = settings;
        polish.method = SolverMethod::Admm;
        polish.max_iter = std::min(settings.max_iter, 50000);
        Solution admm = solve_admm(p, polish, WarmStart{ipm.z, ipm.dual});
        admm.iterations += ipm.iterations;
        admm.seconds += ipm.seconds;
        return admm.status == SolveStatus::Optimal ? admm : ipm;
    };
    if (program.A.rows() == 0) {
        return run(program, warm);
    }

    const auto start = Clock::now();
    const Reduction red(program);
    const double tol_b = settings.eps_abs + settings.eps_rel * program.b.norm();
    Solution out;
    if (red.reduced.dim_z == 0) {
        out.z = red.zp;
        out.lambda_min = min_eigenvalue(program.eval_map(out.z));
        out.status = red.infeasibility <= tol_b && out.lambda_min >= -tol_b ? SolveStatus::Optimal
                                                                               : SolveStatus::InfeasibleSuspected;
    } else {
        std::optional<WarmStart> reduced_warm;
        if (warm && warm->z.size() == static_cast<Eigen::Index>(program.dim_z)) {
            reduced_warm = WarmStart{red.project(warm->z), warm->dual};
        }
        out = run(red.reduced, reduced_warm);
        out.z = red.lift(out.z);
        out.dual_objective += red.offset;
        if (red.infeasibility > tol_b) {
            out.status = SolveStatus::InfeasibleSuspected;
        }
    }
    out.objective_value = program.c.dot(out.z);
    out.equality_residual = (program.A * out.z - program.b).norm();
    out.gap = std::abs(out.objective_value - out.dual_objective);
    out.seconds = seconds_since(start);
    return out;
}

} // namespace theta
