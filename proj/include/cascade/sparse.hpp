#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "cascade/core.hpp"

namespace cascade {

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Reduced (constraint-eliminated) linear system in CSR layout.
struct SparseSystem {
    SparseMat A;
    Eigen::VectorXd rhs;

    int dim() const { return static_cast<int>(A.rows()); }

    /// max |A - A^T| / max |A|
    double symmetry_error() const {
        SparseMat D = A - SparseMat(A.transpose());
        double num = 0, den = 0;
        for (int k = 0; k < D.outerSize(); ++k)
            for (SparseMat::InnerIterator it(D, k); it; ++it)
                num = std::max(num, std::abs(it.value()));
        for (int k = 0; k < A.outerSize(); ++k)
            for (SparseMat::InnerIterator it(A, k); it; ++it)
                den = std::max(den, std::abs(it.value()));
        return den > 0 ? num / den : 0.0;
    }

    void write_matrix_market(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw Error("cannot open '" + path + "' for writing");
        os << "%%MatrixMarket matrix coordinate real general\n";
        os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
        char buf[96];
        for (int k = 0; k < A.outerSize(); ++k)
            for (SparseMat::InnerIterator it(A, k); it; ++it) {
                std::snprintf(buf, sizeof buf, "%d %d %.17g\n",
                              static_cast<int>(it.row()) + 1,
                              static_cast<int>(it.col()) + 1, it.value());
                os << buf;
            }
    }
};

struct LinearSolveStats {
    std::string method;
    int iterations = 0;      // 0 for direct factorization
    double residual = 0.0;   // final relative residual
    int dim = 0;
    long long nonzeros = 0;
};

/// Sparse LU with COLAMD ordering; deterministic pivoting.
inline Eigen::VectorXd solve_direct(const SparseSystem& sys, LinearSolveStats* stats = nullptr) {
    Eigen::SparseMatrix<double> Ac = sys.A;  // column-major copy for the factorization
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(Ac);
    lu.factorize(Ac);
    if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
    Eigen::VectorXd x = lu.solve(sys.rhs);
    if (lu.info() != Eigen::Success) throw SolveFailure("sparse LU solve failed");
    if (stats) {
        stats->method = "sparselu";
        stats->iterations = 0;
        const double rn = sys.rhs.norm();
        stats->residual = rn > 0 ? (sys.A * x - sys.rhs).norm() / rn : 0.0;
        stats->dim = sys.dim();
        stats->nonzeros = sys.A.nonZeros();
    }
    return x;
}

/// Factorization wrapper for multi-RHS reuse (stability probes).
class DirectFactorization {
  public:
    explicit DirectFactorization(const SparseMat& A) : Ac_(A) {
        lu_.analyzePattern(Ac_);
        lu_.factorize(Ac_);
        if (lu_.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
    }
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd x = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success) throw SolveFailure("sparse LU solve failed");
        return x;
    }

  private:
    Eigen::SparseMatrix<double> Ac_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

/// Preconditioned MINRES for the symmetric indefinite saddle system. The
/// preconditioner is a positive diagonal: velocity-stiffness diagonal on the
/// velocity block, lumped pressure mass on the pressure block.
inline Eigen::VectorXd solve_minres(const SparseSystem& sys, const Eigen::VectorXd& precond_diag,
                                    double tol, int max_iter, LinearSolveStats* stats = nullptr) {
    const int n = sys.dim();
    Eigen::VectorXd Minv = precond_diag.cwiseInverse();
    for (int i = 0; i < n; ++i)
        if (!(precond_diag[i] > 0)) throw SolveFailure("MINRES preconditioner not positive");

    const Eigen::VectorXd& b = sys.rhs;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = Minv.cwiseProduct(r);
    double beta1 = std::sqrt(r.dot(z));
    const double bnorm = beta1;
    if (beta1 == 0.0) {
        if (stats) *stats = {"minres", 0, 0.0, n, sys.A.nonZeros()};
        return x;
    }

    // Paige-Saunders recurrences
    Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(n), v = r / beta1;
    Eigen::VectorXd z_cur = z / beta1;
    double beta = beta1;
    double eta = beta1;
    double c_old = 1.0, c = 1.0, s_old = 0.0, s = 0.0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n), w_old = Eigen::VectorXd::Zero(n);
    double rel = 1.0;
    int it = 0;
    for (it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd Av = sys.A * z_cur;
        const double alpha = z_cur.dot(Av);
        Eigen::VectorXd v_next = Av - alpha * v - beta * v_prev;
        Eigen::VectorXd z_next = Minv.cwiseProduct(v_next);
        const double beta_next = std::sqrt(std::max(0.0, v_next.dot(z_next)));

        const double delta = c * alpha - c_old * s * beta;
        const double gamma2 = s * alpha + c_old * c * beta;
        const double epsilon = s_old * beta;
        const double gamma1 = std::hypot(delta, beta_next);
        if (gamma1 == 0.0) throw NonConvergence("MINRES breakdown");

        const double c_new = delta / gamma1;
        const double s_new = beta_next / gamma1;

        Eigen::VectorXd w_new = (z_cur - gamma2 * w - epsilon * w_old) / gamma1;
        x += c_new * eta * w_new;
        eta = -s_new * eta;

        w_old = w;
        w = w_new;
        v_prev = v;
        if (beta_next > 0) {
            v = v_next / beta_next;
            z_cur = z_next / beta_next;
        }
        c_old = c;
        s_old = s;
        c = c_new;
        s = s_new;
        beta = beta_next;

        rel = std::abs(eta) / bnorm;
        if (rel <= tol) break;
    }
    const double true_rel = (sys.A * x - b).norm() / b.norm();
    if (true_rel > 100 * tol && rel > tol)
        throw NonConvergence("MINRES did not converge in " + std::to_string(max_iter) +
                             " iterations (rel " + std::to_string(true_rel) + ")");
    if (stats) *stats = {"minres", std::min(it, max_iter), true_rel, n, sys.A.nonZeros()};
    return x;
}

}  // namespace cascade
