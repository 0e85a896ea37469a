#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a plain serial version kept as the reference in tests and
// benchmarks. The two must agree bit-for-bit except where a reduction order
// differs (gram), where agreement is to rounding.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdecomp/symmat.hpp"

namespace cdecomp::kernels {

enum class EntryRule : std::uint8_t {
  Diagonal,   // clamp to [-diag_cap, diag_cap]
  Penalized,  // soft-threshold by shrink, then clamp to [-offdiag_cap, offdiag_cap]
  Fixed,      // overwrite with fixed_value
};

/// Entrywise proximal map of gamma*||.||_1,off plus box indicators.
struct ProxPlan {
  double shrink = 0.0;
  double offdiag_cap = 0.0;
  double diag_cap = 0.0;
  /// Empty means "Diagonal on the diagonal, Penalized elsewhere".
  Eigen::Matrix<EntryRule, Eigen::Dynamic, Eigen::Dynamic> rules;
  Eigen::MatrixXd fixed_value;
};

void prox_box_l1(const Eigen::MatrixXd& v, const ProxPlan& plan, Eigen::MatrixXd& out);
void prox_box_l1_serial(const Eigen::MatrixXd& v, const ProxPlan& plan, Eigen::MatrixXd& out);

void kronecker_gather(const Eigen::MatrixXd& sigma, std::span<const IndexPair> rows,
                      std::span<const IndexPair> cols, Eigen::MatrixXd& out);
void kronecker_gather_serial(const Eigen::MatrixXd& sigma, std::span<const IndexPair> rows,
                             std::span<const IndexPair> cols, Eigen::MatrixXd& out);

/// out = data^T data (unnormalized).
void gram(const Eigen::MatrixXd& data, Eigen::MatrixXd& out);
void gram_serial(const Eigen::MatrixXd& data, Eigen::MatrixXd& out);

/// Directed-edge layout of a sparse symmetric graph for Gaussian BP.
/// Edge e runs src[e] -> dst[e]; reverse[e] is the index of dst[e] -> src[e].
struct EdgeList {
  Index nodes = 0;
  std::vector<Index> src;
  std::vector<Index> dst;
  std::vector<double> weight;  // J[src][dst]
  std::vector<std::size_t> reverse;

  static EdgeList from_matrix(const Eigen::MatrixXd& j, double threshold = 0.0);
  std::size_t size() const { return src.size(); }
};

struct MessageState {
  std::vector<double> dj;  // precision message per directed edge
  std::vector<double> dh;  // potential message per directed edge
};

/// One synchronous Gaussian BP sweep in information form. Reads `in`, writes
/// `out`. `node_j`/`node_h` hold J_ii + sum of incoming dj (resp. h_i + dh).
/// damping in [0,1) mixes the previous message. Returns false if any cavity
/// precision is <= 0.
bool bp_sweep(const EdgeList& edges, const Eigen::VectorXd& node_j, const Eigen::VectorXd& node_h,
              const MessageState& in, double damping, MessageState& out);
bool bp_sweep_serial(const EdgeList& edges, const Eigen::VectorXd& node_j,
                     const Eigen::VectorXd& node_h, const MessageState& in, double damping,
                     MessageState& out);

}  // namespace cdecomp::kernels
