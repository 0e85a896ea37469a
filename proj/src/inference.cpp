#include "cdecomp/inference.hpp"

#include <algorithm>
#include <cmath>

#include "cdecomp/errors.hpp"
#include "cdecomp/kernels.hpp"

namespace cdecomp {

namespace {

constexpr double kMessageLimit = 1e12;

void check_model(const InfoModel& m) {
  if (m.h.size() != m.j.dim()) {
    throw DimensionMismatch("information model: h has " + std::to_string(m.h.size()) +
                            " entries, J is " + std::to_string(m.j.dim()) + "-dimensional");
  }
}

}  // namespace

Moments exact_moments(const InfoModel& m) {
  check_model(m);
  Eigen::LLT<Eigen::MatrixXd> llt(m.j.dense());
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("exact_moments: J is not positive definite");
  const Index p = m.j.dim();
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  return {llt.solve(m.h), inv.diagonal()};
}

Eigen::MatrixXd abs_partial_correlation(const SymmetricMatrix& j) {
  const Eigen::VectorXd d = j.dense().diagonal();
  if (!(d.minCoeff() > 0.0)) throw NonPositiveDiagonal("walk-summability needs a positive diagonal");
  const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = s.asDiagonal() * j.dense().cwiseAbs() * s.asDiagonal();
  r.diagonal().setZero();
  return r;
}

double walk_summability(const SymmetricMatrix& j) {
  return spectral_norm(SymmetricMatrix(abs_partial_correlation(j)));
}

LbpTrace lbp_run(const InfoModel& m, const LbpOptions& options) {
  check_model(m);
  if (options.max_iter < 1) throw PreconditionViolated("lbp_run requires max_iter >= 1");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw PreconditionViolated("lbp_run damping must lie in [0, 1)");
  }
  const Moments exact = exact_moments(m);
  const Index p = m.j.dim();
  const auto edges = kernels::EdgeList::from_matrix(m.j.dense());

  kernels::MessageState cur{std::vector<double>(edges.size(), 0.0),
                            std::vector<double>(edges.size(), 0.0)};
  kernels::MessageState next;
  Eigen::VectorXd node_j(p), node_h(p);
  const auto accumulate = [&](const kernels::MessageState& msg) {
    node_j = m.j.dense().diagonal();
    node_h = m.h;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      node_j(edges.dst[e]) += msg.dj[e];
      node_h(edges.dst[e]) += msg.dh[e];
    }
  };

  LbpTrace trace;
  const auto diverge = [&](const char* why) {
    trace.status = LbpStatus::Diverged;
    if (options.throw_on_divergence) throw MessagePrecisionNonpositive(why);
  };

  accumulate(cur);
  for (int it = 1; it <= options.max_iter; ++it) {
    if (!kernels::bp_sweep(edges, node_j, node_h, cur, options.damping, next)) {
      diverge("belief propagation produced a nonpositive cavity precision");
      break;
    }
    double change = 0.0, largest = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      change = std::max({change, std::abs(next.dj[e] - cur.dj[e]), std::abs(next.dh[e] - cur.dh[e])});
      largest = std::max({largest, std::abs(next.dj[e]), std::abs(next.dh[e])});
    }
    if (!std::isfinite(largest) || largest > kMessageLimit) {
      diverge("belief propagation messages exceeded the divergence limit");
      break;
    }
    std::swap(cur, next);
    accumulate(cur);
    if (!(node_j.minCoeff() > 0.0)) {
      diverge("belief propagation produced a nonpositive marginal precision");
      break;
    }

    trace.mean = node_h.cwiseQuotient(node_j);
    trace.variances = node_j.cwiseInverse();
    trace.mean_errors.push_back((trace.mean - exact.mean).cwiseAbs().mean());
    trace.var_errors.push_back((trace.variances - exact.variances).cwiseAbs().mean());
    trace.iterations_run = it;
    if (change < options.tol) {
      trace.converged = true;
      trace.status = LbpStatus::Converged;
      break;
    }
  }
  return trace;
}

}  // namespace cdecomp
