#pragma once

#include <simlearn/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simlearn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index  = Eigen::Index;

/// Regularizers supported for the similarity matrix.
enum class NormKind { L1, Frobenius, Mixed21, Trace };

inline constexpr std::array<NormKind, 4> all_norm_kinds{
    NormKind::L1, NormKind::Frobenius, NormKind::Mixed21, NormKind::Trace};

/// Short name used by the CLI and file formats: l1, fro, mixed21, trace.
inline std::string_view to_string(NormKind kind) {
    switch (kind) {
        case NormKind::L1: return "l1";
        case NormKind::Frobenius: return "fro";
        case NormKind::Mixed21: return "mixed21";
        case NormKind::Trace: return "trace";
    }
    return "unknown";
}

inline NormKind parse_norm_kind(std::string_view name) {
    for (auto kind : all_norm_kinds)
        if (to_string(kind) == name)
            return kind;
    throw std::invalid_argument("unknown norm kind '" + std::string(name) +
                                "' (expected l1, fro, mixed21 or trace)");
}

/// Stable index of a norm kind, independent of any user-supplied ordering.
inline constexpr int norm_index(NormKind kind) { return static_cast<int>(kind); }

/// Dense symmetric matrix. Symmetry is exact: A(k,l) == A(l,k) bitwise.
class SymMatrix {
  public:
    /// Zero matrix of dimension d.
    explicit SymMatrix(Index d) : m_(Matrix::Zero(check_dim(d), d)) {}

    /// Takes ownership of `m`; throws unless it is square and exactly symmetric.
    explicit SymMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw std::invalid_argument("SymMatrix: matrix is not square");
        check_dim(m_.rows());
        for (Index k = 0; k < m_.rows(); ++k)
            for (Index l = k + 1; l < m_.cols(); ++l)
                if (!(m_(k, l) == m_(l, k)) && !(std::isnan(m_(k, l)) && std::isnan(m_(l, k))))
                    throw std::invalid_argument("SymMatrix: matrix is not symmetric");
    }

    static SymMatrix identity(Index d) { return SymMatrix(Matrix(Matrix::Identity(check_dim(d), d))); }

    Index dim() const { return m_.rows(); }
    const Matrix &matrix() const { return m_; }
    double operator()(Index k, Index l) const { return m_(k, l); }

    friend bool operator==(const SymMatrix &a, const SymMatrix &b) {
        return a.dim() == b.dim() && a.m_ == b.m_;
    }

  private:
    static Index check_dim(Index d) {
        if (d < 1)
            throw std::invalid_argument("SymMatrix: dimension must be at least 1");
        return d;
    }

    Matrix m_;
};

/// (B + B^T) / 2. The result is exactly symmetric since the two sums commute.
inline SymMatrix symmetrize(const Matrix &b) {
    if (b.rows() != b.cols())
        throw std::invalid_argument("symmetrize: matrix is not square");
    Matrix s(b.rows(), b.cols());
    for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l)
            s(k, l) = 0.5 * (b(k, l) + b(l, k));
    return SymMatrix(std::move(s));
}

/// <A, B> = trace(B^T A).
inline double inner(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("inner: dimension mismatch");
    return a.cwiseProduct(b).sum();
}

struct SymEigen {
    Vector values;  // ascending
    Matrix vectors; // columns are eigenvectors
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition. Iterates until the off-diagonal
/// Frobenius mass drops below `tol * ||A||_F`; throws numeric_error when the
/// sweep budget runs out or the input is not finite.
inline SymEigen sym_eigendecomposition(const SymMatrix &sym, double tol = 1e-12, int max_sweeps = 100) {
    const Index d = sym.dim();
    Matrix a      = sym.matrix();
    if (!a.allFinite())
        throw numeric_error("sym_eigendecomposition: non-finite input");
    Matrix v        = Matrix::Identity(d, d);
    const double scale = a.norm();

    auto off_mass = [&] {
        double s = 0;
        for (Index p = 0; p < d; ++p)
            for (Index q = 0; q < d; ++q)
                if (p != q)
                    s += a(p, q) * a(p, q);
        return std::sqrt(s);
    };

    int sweep = 0;
    for (; off_mass() > tol * scale; ++sweep) {
        if (sweep == max_sweeps)
            throw numeric_error("sym_eigendecomposition: no convergence within " +
                                std::to_string(max_sweeps) + " sweeps");
        for (Index p = 0; p + 1 < d; ++p) {
            for (Index q = p + 1; q < d; ++q) {
                const double apq = a(p, q);
                if (apq == 0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * apq);
                double t;
                if (std::abs(theta) > 1e150)
                    t = 0.5 / theta;
                else
                    t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1);
                const double s = t * c;
                for (Index k = 0; k < d; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < d; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Index k = 0; k < d; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });
    SymEigen out{Vector(d), Matrix(d, d), sweep};
    for (Index i = 0; i < d; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        out.values(i)     = a(src, src);
        out.vectors.col(i) = v.col(src);
    }
    return out;
}

/// Largest singular value of a general square matrix, via the eigenvalues of B^T B.
inline double spectral_norm(const Matrix &b) {
    if (b.size() == 0)
        return 0;
    const SymMatrix gram = symmetrize(b.transpose() * b);
    const auto eig       = sym_eigendecomposition(gram);
    return std::sqrt(std::max(0.0, eig.values.maxCoeff()));
}

/// ||A|| for the chosen regularizer.
inline double norm(const SymMatrix &a, NormKind kind) {
    const Matrix &m = a.matrix();
    switch (kind) {
        case NormKind::L1: return m.cwiseAbs().sum();
        case NormKind::Frobenius: return m.norm();
        case NormKind::Mixed21: return m.rowwise().norm().sum();
        case NormKind::Trace: return sym_eigendecomposition(a).values.cwiseAbs().sum();
    }
    throw std::invalid_argument("norm: bad kind");
}

/// Dual of the regularizer, evaluated on an arbitrary square matrix:
/// max-abs entry, max row 2-norm, Frobenius, spectral.
inline double dual_norm(const Matrix &b, NormKind kind) {
    if (b.rows() != b.cols())
        throw std::invalid_argument("dual_norm: matrix is not square");
    switch (kind) {
        case NormKind::L1: return b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
        case NormKind::Frobenius: return b.norm();
        case NormKind::Mixed21: return b.size() ? b.rowwise().norm().maxCoeff() : 0.0;
        case NormKind::Trace: return spectral_norm(b);
    }
    throw std::invalid_argument("dual_norm: bad kind");
}

/// dual_norm(v x^T) without forming the outer product.
inline double dual_norm_rank1(const Vector &v, const Vector &x, NormKind kind) {
    if (v.size() != x.size())
        throw std::invalid_argument("dual_norm_rank1: dimension mismatch");
    if (v.size() == 0)
        return 0;
    switch (kind) {
        case NormKind::L1: return v.lpNorm<Eigen::Infinity>() * x.lpNorm<Eigen::Infinity>();
        case NormKind::Frobenius:
        case NormKind::Trace: return v.norm() * x.norm();
        case NormKind::Mixed21: return v.lpNorm<Eigen::Infinity>() * x.norm();
    }
    throw std::invalid_argument("dual_norm_rank1: bad kind");
}

namespace detail {

inline double soft_threshold(double x, double tau) {
    if (x > tau)
        return x - tau;
    if (x < -tau)
        return x + tau;
    return 0.0;
}

inline double shrink_factor(double magnitude, double tau) {
    return magnitude > tau ? 1.0 - tau / magnitude : 0.0;
}


/// Projects every row of z onto the Euclidean unit ball.
inline void project_rows_unit(Matrix &z) {
    for (Index k = 0; k < z.rows(); ++k) {
        const double n = z.row(k).norm();
        if (n > 1)
            z.row(k) /= n;
    }
}

/// Exact prox of tau * sum_k ||A_k.|| restricted to symmetric A.
///
/// Dual: A = B - tau sym(Z) with rows of Z in the unit ball, Z minimizing
/// 1/2 ||B - tau sym(Z)||^2. Solved by accelerated projected gradient (step
/// 1/tau^2) started from the row-shrinkage dual point, stopping on a duality
/// gap below gap_tol * (1 + ||B||^2), which bounds ||A - A*||_F^2 by twice
/// the gap.
inline Matrix mixed21_sym_prox(const Matrix &b, double tau, double gap_tol = 1e-15, int max_iters = 20000) {
    const Index d = b.rows();
    Matrix z(d, d);
    for (Index k = 0; k < d; ++k) {
        const double n = b.row(k).norm();
        z.row(k)       = n > tau ? Vector(b.row(k).transpose() / n) : Vector(b.row(k).transpose() / tau);
    }
    const double scale = 1 + b.squaredNorm();

    Matrix y = z, z_prev = z;
    double theta = 1;
    Matrix a = b;
    for (int it = 0; it < max_iters; ++it) {
        // Gap check on the current feasible dual point.
        const Matrix s     = 0.5 * (z + z.transpose());
        a                  = b - tau * s;
        const double prim  = 0.5 * (a - b).squaredNorm() + tau * a.rowwise().norm().sum();
        const double dual  = tau * inner(s, b) - 0.5 * tau * tau * s.squaredNorm();
        if (prim - dual <= gap_tol * scale)
            break;
        z_prev = z;
        z      = y + (b - tau * (0.5 * (y + y.transpose()))) / tau;
        project_rows_unit(z);
        const double theta_next = 0.5 * (1 + std::sqrt(1 + 4 * theta * theta));
        y                       = z + ((theta - 1) / theta_next) * (z - z_prev);
        theta                   = theta_next;
    }
    return a;
}
} // namespace detail

/// Proximal map argmin_A 1/2 ||A - B||_F^2 + tau ||A||, kept symmetric.
///
/// L1, Frobenius and Trace are the exact closed forms. Mixed21 has no closed
/// form over symmetric matrices (row-wise shrinkage scales rows and columns
/// differently), so it is solved through its dual; see mixed21_sym_prox.
inline SymMatrix prox(const SymMatrix &b, double tau, NormKind kind) {
    if (!(tau >= 0))
        throw std::invalid_argument("prox: tau must be nonnegative");
    if (tau == 0)
        return b;
    const Matrix &m = b.matrix();
    switch (kind) {
        case NormKind::L1: {
            Matrix out = m.unaryExpr([tau](double x) { return detail::soft_threshold(x, tau); });
            return SymMatrix(std::move(out));
        }
        case NormKind::Frobenius: {
            const double f = detail::shrink_factor(m.norm(), tau);
            return SymMatrix(Matrix(m * f));
        }
        case NormKind::Mixed21: return SymMatrix(detail::mixed21_sym_prox(m, tau));
        case NormKind::Trace: {
            const auto eig = sym_eigendecomposition(b);
            Vector shrunk  = eig.values.unaryExpr([tau](double x) { return detail::soft_threshold(x, tau); });
            return symmetrize(eig.vectors * shrunk.asDiagonal() * eig.vectors.transpose());
        }
    }
    throw std::invalid_argument("prox: bad kind");
}

} // namespace simlearn
