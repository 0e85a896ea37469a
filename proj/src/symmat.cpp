#include "cdecomp/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdecomp/errors.hpp"
#include "cdecomp/kernels.hpp"

namespace cdecomp {

SymmetricMatrix::SymmetricMatrix() : m_(Eigen::MatrixXd::Zero(1, 1)) {}

SymmetricMatrix::SymmetricMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("symmetric matrix must be square, got " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()));
  }
  if (m.rows() < 1) throw PreconditionViolated("symmetric matrix must have dim >= 1");
  if (!m.allFinite()) throw PreconditionViolated("symmetric matrix has non-finite entries");
  m_ = 0.5 * (m + m.transpose());
}

SymmetricMatrix SymmetricMatrix::identity(Index p) {
  if (p < 1) throw PreconditionViolated("dim must be >= 1");
  return {Eigen::MatrixXd::Identity(p, p), Trusted{}};
}

SymmetricMatrix SymmetricMatrix::zero(Index p) {
  if (p < 1) throw PreconditionViolated("dim must be >= 1");
  return {Eigen::MatrixXd::Zero(p, p), Trusted{}};
}

SymmetricMatrix SymmetricMatrix::diagonal(const Eigen::VectorXd& d) {
  return SymmetricMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("matrix sum dimension mismatch");
  return {a.m_ + b.m_, SymmetricMatrix::Trusted{}};
}

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("matrix difference dimension mismatch");
  return {a.m_ - b.m_, SymmetricMatrix::Trusted{}};
}

SymmetricMatrix operator*(double s, const SymmetricMatrix& a) {
  return {s * a.m_, SymmetricMatrix::Trusted{}};
}

EigenDecomposition eig_sym(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense());
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "symmetric eigensolver did not converge (p=" << m.dim()
        << ", max|entry|=" << max_abs_entry(m.dense())
        << ", frobenius=" << m.dense().norm() << ")";
    throw EigenNonConvergence(msg.str());
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const SymmetricMatrix& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.dense());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite");
  }
  // LLT only reports failure on a non-positive pivot; an underflowing pivot
  // still yields a useless factor.
  const auto diag = llt.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) {
    throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

}  // namespace

double logdet_pd(const SymmetricMatrix& m) {
  const auto llt = checked_cholesky(m, "logdet_pd");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

SymmetricMatrix inverse_pd(const SymmetricMatrix& m) {
  const auto llt = checked_cholesky(m, "inverse_pd");
  return SymmetricMatrix(llt.solve(Eigen::MatrixXd::Identity(m.dim(), m.dim())));
}

bool is_positive_definite(const SymmetricMatrix& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.dense());
  return llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0;
}

double min_eigenvalue(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenNonConvergence("min_eigenvalue: no convergence");
  return es.eigenvalues()(0);
}

double spectral_norm(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenNonConvergence("spectral_norm: no convergence");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double inf_operator_norm(const Eigen::MatrixXd& u) {
  if (u.size() == 0) return 0.0;
  return u.cwiseAbs().rowwise().sum().maxCoeff();
}

double max_abs_entry(const Eigen::MatrixXd& u) {
  if (u.size() == 0) return 0.0;
  return u.cwiseAbs().maxCoeff();
}

double max_abs_offdiag(const Eigen::MatrixXd& u) {
  double best = 0.0;
  for (Index j = 0; j < u.cols(); ++j)
    for (Index i = 0; i < u.rows(); ++i)
      if (i != j) best = std::max(best, std::abs(u(i, j)));
  return best;
}

double l1_offdiag(const Eigen::MatrixXd& u) {
  return u.cwiseAbs().sum() - u.diagonal().cwiseAbs().sum();
}

double l1_diag(const Eigen::MatrixXd& u) { return u.diagonal().cwiseAbs().sum(); }

PairIndexSet::PairIndexSet(Index dim, std::vector<IndexPair> pairs)
    : dim_(dim), pairs_(std::move(pairs)), mask_(static_cast<std::size_t>(dim * dim), 0) {
  if (dim < 1) throw PreconditionViolated("pair set dim must be >= 1");
  for (const auto& pr : pairs_) {
    if (pr.row < 0 || pr.row >= dim || pr.col < 0 || pr.col >= dim) {
      throw PreconditionViolated("pair (" + std::to_string(pr.row) + "," +
                                 std::to_string(pr.col) + ") out of range for dim " +
                                 std::to_string(dim));
    }
    auto& slot = mask_[static_cast<std::size_t>(pr.row * dim + pr.col)];
    if (slot) {
      throw PreconditionViolated("duplicate pair (" + std::to_string(pr.row) + "," +
                                 std::to_string(pr.col) + ")");
    }
    slot = 1;
  }
}

PairIndexSet PairIndexSet::all_pairs(Index dim) {
  std::vector<IndexPair> pairs;
  pairs.reserve(static_cast<std::size_t>(dim * dim));
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) pairs.push_back({i, j});
  return {dim, std::move(pairs)};
}

PairIndexSet PairIndexSet::diagonal(Index dim) {
  std::vector<IndexPair> pairs;
  for (Index i = 0; i < dim; ++i) pairs.push_back({i, i});
  return {dim, std::move(pairs)};
}

bool PairIndexSet::contains(IndexPair pr) const {
  if (pr.row < 0 || pr.row >= dim_ || pr.col < 0 || pr.col >= dim_) return false;
  return mask_[static_cast<std::size_t>(pr.row * dim_ + pr.col)] != 0;
}

Eigen::MatrixXd hessian_submatrix(const SymmetricMatrix& sigma_m, const PairIndexSet& rows,
                                  const PairIndexSet& cols) {
  if ((!rows.empty() && rows.dim() != sigma_m.dim()) ||
      (!cols.empty() && cols.dim() != sigma_m.dim())) {
    throw DimensionMismatch("hessian_submatrix: pair sets do not match matrix dimension");
  }
  Eigen::MatrixXd out;
  kernels::kronecker_gather(sigma_m.dense(), rows.pairs(), cols.pairs(), out);
  return out;
}

}  // namespace cdecomp
