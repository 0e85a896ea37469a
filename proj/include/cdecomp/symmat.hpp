#pragma once

#include <compare>
#include <vector>

#include <Eigen/Dense>

namespace cdecomp {

using Index = Eigen::Index;

/// Dense symmetric p x p matrix with finite entries.
///
/// Symmetry is exact: every constructor stores (m + m^T) / 2, which leaves an
/// already-symmetric input bit-for-bit unchanged. Instances are immutable.
class SymmetricMatrix {
 public:
  /// 1 x 1 zero matrix.
  SymmetricMatrix();
  explicit SymmetricMatrix(const Eigen::MatrixXd& m);

  static SymmetricMatrix identity(Index p);
  static SymmetricMatrix zero(Index p);
  static SymmetricMatrix diagonal(const Eigen::VectorXd& d);

  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Eigen::MatrixXd& dense() const { return m_; }

  friend SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b);
  friend SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b);
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a);

 private:
  struct Trusted {};
  SymmetricMatrix(Eigen::MatrixXd m, Trusted) : m_(std::move(m)) {}

  Eigen::MatrixXd m_;
};

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Throws EigenNonConvergence with conditioning diagnostics on failure.
EigenDecomposition eig_sym(const SymmetricMatrix& m);

/// log det via Cholesky. Throws NotPositiveDefinite if any pivot is <= 0.
double logdet_pd(const SymmetricMatrix& m);

/// Inverse of a positive definite matrix (symmetrized). Throws NotPositiveDefinite.
SymmetricMatrix inverse_pd(const SymmetricMatrix& m);

bool is_positive_definite(const SymmetricMatrix& m);
double min_eigenvalue(const SymmetricMatrix& m);

/// Largest singular value; for a symmetric matrix, max |eigenvalue|.
double spectral_norm(const SymmetricMatrix& m);

/// |||U|||_inf = max_i sum_j |U_ij|. Works on rectangular matrices; 0 when empty.
double inf_operator_norm(const Eigen::MatrixXd& u);

/// Element-wise max |U_ij| (0 when empty).
double max_abs_entry(const Eigen::MatrixXd& u);
double max_abs_offdiag(const Eigen::MatrixXd& u);
double l1_offdiag(const Eigen::MatrixXd& u);
double l1_diag(const Eigen::MatrixXd& u);

struct IndexPair {
  Index row = 0;
  Index col = 0;
  auto operator<=>(const IndexPair&) const = default;
};

/// Ordered (row, col) pairs into a p x p grid, without duplicates.
class PairIndexSet {
 public:
  PairIndexSet() = default;
  PairIndexSet(Index dim, std::vector<IndexPair> pairs);

  static PairIndexSet all_pairs(Index dim);
  static PairIndexSet diagonal(Index dim);

  Index dim() const { return dim_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  bool contains(IndexPair pr) const;
  const std::vector<IndexPair>& pairs() const { return pairs_; }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

 private:
  Index dim_ = 0;
  std::vector<IndexPair> pairs_;
  std::vector<char> mask_;
};

/// Rows x cols block of Sigma (x) Sigma without forming the p^2 x p^2 matrix:
/// entry ((i,j),(k,l)) = sigma[i][k] * sigma[j][l].
Eigen::MatrixXd hessian_submatrix(const SymmetricMatrix& sigma_m, const PairIndexSet& rows,
                                  const PairIndexSet& cols);

}  // namespace cdecomp
