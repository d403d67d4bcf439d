#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sake {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense symmetric matrix. Symmetry is exact: every constructor stores
// (M + M^T) / 2, which IEEE addition makes bitwise symmetric.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(Index dim);
    static SymMatrix diagonal(const Vector& diag);

    const Matrix& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    double operator()(Index i, Index j) const { return m_(i, j); }
    double trace() const { return m_.trace(); }

    // Adds `value` to every diagonal entry.
    SymMatrix plus_identity(double value) const;

    friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
        return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() && a.m_ == b.m_;
    }

private:
    Matrix m_;
};

// Mean, shrinkage-regularized covariance and sample count of one activation set.
struct GaussianSummary {
    Vector mean;
    SymMatrix cov;
    std::size_t count = 0;
    double reg = 0.0;

    Index dim() const noexcept { return mean.size(); }
};

inline constexpr double kDefaultRegularization = 0.01;

// Throws InvalidArgument unless every entry is finite.
void require_finite(const Vector& v, const char* what);

Vector empirical_mean(std::span<const Vector> samples);

// Unbiased (n - 1) covariance plus reg on the diagonal.
SymMatrix empirical_covariance(std::span<const Vector> samples, double reg);

GaussianSummary summarize(std::span<const Vector> samples, double reg = kDefaultRegularization);

// 1e-8 * |trace| / d: eigenvalues above -tol are treated as zero by psd_sqrt,
// and eigenvalues at or below +tol make psd_inv_sqrt refuse.
double eigen_tolerance(const SymMatrix& m);

SymMatrix psd_sqrt(const SymMatrix& m);
SymMatrix psd_inv_sqrt(const SymMatrix& m);

double smallest_eigenvalue(const SymMatrix& m);

// ||a - b||_F / max(||b||_F, tiny)
double relative_frobenius(const Matrix& a, const Matrix& b);

}  // namespace sake
