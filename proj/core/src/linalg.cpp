#include "sake/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sake/errors.hpp"

namespace sake {

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
        fail(ErrorKind::DimensionMismatch,
             "symmetric matrix must be square, got " + std::to_string(m.rows()) + "x" +
                 std::to_string(m.cols()));
    }
    m_ = (m + m.transpose()) * 0.5;
}

SymMatrix SymMatrix::identity(Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

SymMatrix SymMatrix::plus_identity(double value) const {
    SymMatrix out = *this;
    out.m_.diagonal().array() += value;
    return out;
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) fail(ErrorKind::InvalidArgument, std::string(what) + " contains NaN or Inf");
}

namespace {

Index common_dim(std::span<const Vector> samples) {
    if (samples.empty()) fail(ErrorKind::EmptySampleSet, "sample set is empty");
    const Index d = samples.front().size();
    if (d == 0) fail(ErrorKind::DimensionMismatch, "activation vectors must have positive dimension");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != d) {
            fail(ErrorKind::DimensionMismatch, "sample " + std::to_string(i) + " has dimension " +
                                                   std::to_string(samples[i].size()) + ", expected " +
                                                   std::to_string(d));
        }
        require_finite(samples[i], "sample");
    }
    return d;
}

}  // namespace

Vector empirical_mean(std::span<const Vector> samples) {
    const Index d = common_dim(samples);
    Vector sum = Vector::Zero(d);
    for (const auto& s : samples) sum += s;
    return sum / static_cast<double>(samples.size());
}

SymMatrix empirical_covariance(std::span<const Vector> samples, double reg) {
    if (!(reg >= 0.0) || !std::isfinite(reg)) fail(ErrorKind::InvalidArgument, "regularization must be finite and >= 0");
    if (samples.size() < 2) {
        common_dim(samples);
        fail(ErrorKind::InsufficientSamples,
             "covariance needs at least 2 samples, got " + std::to_string(samples.size()));
    }
    const Vector mean = empirical_mean(samples);
    const Index d = mean.size();
    Matrix centered(static_cast<Index>(samples.size()), d);
    for (std::size_t i = 0; i < samples.size(); ++i) centered.row(static_cast<Index>(i)) = (samples[i] - mean).transpose();
    Matrix scatter = centered.transpose() * centered;
    scatter /= static_cast<double>(samples.size() - 1);
    return SymMatrix(scatter).plus_identity(reg);
}

GaussianSummary summarize(std::span<const Vector> samples, double reg) {
    GaussianSummary s;
    s.cov = empirical_covariance(samples, reg);
    s.mean = empirical_mean(samples);
    s.count = samples.size();
    s.reg = reg;
    return s;
}

double eigen_tolerance(const SymMatrix& m) {
    if (m.dim() == 0) return 0.0;
    return 1e-8 * std::abs(m.trace()) / static_cast<double>(m.dim());
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> decompose(const SymMatrix& m) {
    if (m.dim() == 0) fail(ErrorKind::DimensionMismatch, "matrix has zero dimension");
    if (!m.matrix().allFinite()) fail(ErrorKind::InvalidArgument, "matrix contains NaN or Inf");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) fail(ErrorKind::NotPositiveSemidefinite, "eigendecomposition did not converge");
    return solver;
}

SymMatrix recompose(const Matrix& vectors, const Vector& values) {
    return SymMatrix(vectors * values.asDiagonal() * vectors.transpose());
}

}  // namespace

SymMatrix psd_sqrt(const SymMatrix& m) {
    const auto solver = decompose(m);
    const double tol = eigen_tolerance(m);
    Vector values = solver.eigenvalues();
    if (values(0) < -tol) {
        fail(ErrorKind::NotPositiveSemidefinite,
             "smallest eigenvalue " + std::to_string(values(0)) + " is below -" + std::to_string(tol));
    }
    values = values.cwiseMax(0.0).cwiseSqrt();
    return recompose(solver.eigenvectors(), values);
}

SymMatrix psd_inv_sqrt(const SymMatrix& m) {
    const auto solver = decompose(m);
    const double tol = eigen_tolerance(m);
    const Vector& values = solver.eigenvalues();
    if (values(0) < -tol) {
        fail(ErrorKind::NotPositiveSemidefinite,
             "smallest eigenvalue " + std::to_string(values(0)) + " is below -" + std::to_string(tol));
    }
    if (values(0) <= tol) {
        fail(ErrorKind::SingularMatrix, "matrix is singular within tolerance (smallest eigenvalue " +
                                            std::to_string(values(0)) + "); increase the regularization");
    }
    return recompose(solver.eigenvectors(), values.cwiseSqrt().cwiseInverse());
}

double smallest_eigenvalue(const SymMatrix& m) { return decompose(m).eigenvalues()(0); }

double relative_frobenius(const Matrix& a, const Matrix& b) {
    const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
    return (a - b).norm() / denom;
}

}  // namespace sake
