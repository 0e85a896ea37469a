#include "cdecomp/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "cdecomp/errors.hpp"

namespace cdecomp::kernels {

namespace {

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

inline double prox_entry(const Eigen::MatrixXd& v, const ProxPlan& plan, Index i, Index j) {
  EntryRule rule;
  if (plan.rules.size() == 0) {
    rule = i == j ? EntryRule::Diagonal : EntryRule::Penalized;
  } else {
    rule = plan.rules(i, j);
  }
  switch (rule) {
    case EntryRule::Diagonal:
      return std::clamp(v(i, j), -plan.diag_cap, plan.diag_cap);
    case EntryRule::Penalized:
      return std::clamp(soft_threshold(v(i, j), plan.shrink), -plan.offdiag_cap, plan.offdiag_cap);
    case EntryRule::Fixed:
      return plan.fixed_value(i, j);
  }
  return v(i, j);
}

void check_plan(const Eigen::MatrixXd& v, const ProxPlan& plan) {
  if (plan.rules.size() != 0 && (plan.rules.rows() != v.rows() || plan.rules.cols() != v.cols())) {
    throw DimensionMismatch("prox plan rules do not match matrix shape");
  }
}

}  // namespace

void prox_box_l1(const Eigen::MatrixXd& v, const ProxPlan& plan, Eigen::MatrixXd& out) {
  check_plan(v, plan);
  out.resize(v.rows(), v.cols());
  const Index cols = v.cols();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < v.rows(); ++i) out(i, j) = prox_entry(v, plan, i, j);
}

void prox_box_l1_serial(const Eigen::MatrixXd& v, const ProxPlan& plan, Eigen::MatrixXd& out) {
  check_plan(v, plan);
  out.resize(v.rows(), v.cols());
  for (Index j = 0; j < v.cols(); ++j)
    for (Index i = 0; i < v.rows(); ++i) out(i, j) = prox_entry(v, plan, i, j);
}

void kronecker_gather(const Eigen::MatrixXd& sigma, std::span<const IndexPair> rows,
                      std::span<const IndexPair> cols, Eigen::MatrixXd& out) {
  const auto nr = static_cast<Index>(rows.size());
  const auto nc = static_cast<Index>(cols.size());
  out.resize(nr, nc);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < nc; ++c) {
    const auto [k, l] = cols[static_cast<std::size_t>(c)];
    for (Index r = 0; r < nr; ++r) {
      const auto [i, j] = rows[static_cast<std::size_t>(r)];
      out(r, c) = sigma(i, k) * sigma(j, l);
    }
  }
}

void kronecker_gather_serial(const Eigen::MatrixXd& sigma, std::span<const IndexPair> rows,
                             std::span<const IndexPair> cols, Eigen::MatrixXd& out) {
  out.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Index>(r), static_cast<Index>(c)) =
          sigma(rows[r].row, cols[c].row) * sigma(rows[r].col, cols[c].col);
}

void gram(const Eigen::MatrixXd& data, Eigen::MatrixXd& out) {
  const Index n = data.rows();
  const Index p = data.cols();
  out = Eigen::MatrixXd::Zero(p, p);
#pragma omp parallel
  {
    const int threads = omp_get_num_threads();
    const int tid = omp_get_thread_num();
    const Index begin = n * tid / threads;
    const Index end = n * (tid + 1) / threads;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(p, p);
    if (end > begin) {
      local.selfadjointView<Eigen::Lower>().rankUpdate(
          data.middleRows(begin, end - begin).transpose());
    }
#pragma omp critical(cdecomp_gram)
    out += local;
  }
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
}

void gram_serial(const Eigen::MatrixXd& data, Eigen::MatrixXd& out) {
  const Index p = data.cols();
  out = Eigen::MatrixXd::Zero(p, p);
  for (Index k = 0; k < data.rows(); ++k)
    for (Index j = 0; j < p; ++j)
      for (Index i = j; i < p; ++i) out(i, j) += data(k, i) * data(k, j);
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
}

EdgeList EdgeList::from_matrix(const Eigen::MatrixXd& j, double threshold) {
  EdgeList e;
  e.nodes = j.rows();
  for (Index s = 0; s < j.rows(); ++s)
    for (Index d = 0; d < j.cols(); ++d)
      if (s != d && std::abs(j(s, d)) > threshold) {
        e.src.push_back(s);
        e.dst.push_back(d);
        e.weight.push_back(j(s, d));
      }
  // Edges are sorted by (src, dst), so the reverse edge is found by bisection.
  e.reverse.resize(e.src.size());
  for (std::size_t k = 0; k < e.src.size(); ++k) {
    std::size_t lo = 0, hi = e.src.size();
    const auto key = std::pair{e.dst[k], e.src[k]};
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (std::pair{e.src[mid], e.dst[mid]} < key) lo = mid + 1;
      else hi = mid;
    }
    if (lo == e.src.size() || e.src[lo] != key.first || e.dst[lo] != key.second) {
      throw PreconditionViolated("edge list requires a symmetric support");
    }
    e.reverse[k] = lo;
  }
  return e;
}

namespace {

inline bool bp_edge(const EdgeList& edges, const Eigen::VectorXd& node_j,
                    const Eigen::VectorXd& node_h, const MessageState& in, double damping,
                    MessageState& out, std::size_t e) {
  const Index i = edges.src[e];
  const std::size_t back = edges.reverse[e];
  const double cav_j = node_j(i) - in.dj[back];
  const double cav_h = node_h(i) - in.dh[back];
  if (!(cav_j > 0.0)) {
    out.dj[e] = in.dj[e];
    out.dh[e] = in.dh[e];
    return false;
  }
  const double w = edges.weight[e];
  const double dj = -w * w / cav_j;
  const double dh = -w * cav_h / cav_j;
  out.dj[e] = (1.0 - damping) * dj + damping * in.dj[e];
  out.dh[e] = (1.0 - damping) * dh + damping * in.dh[e];
  return true;
}

}  // namespace

bool bp_sweep(const EdgeList& edges, const Eigen::VectorXd& node_j, const Eigen::VectorXd& node_h,
              const MessageState& in, double damping, MessageState& out) {
  out.dj.resize(edges.size());
  out.dh.resize(edges.size());
  const auto count = static_cast<std::ptrdiff_t>(edges.size());
  int ok = 1;
#pragma omp parallel for schedule(static) reduction(min : ok)
  for (std::ptrdiff_t e = 0; e < count; ++e) {
    if (!bp_edge(edges, node_j, node_h, in, damping, out, static_cast<std::size_t>(e))) ok = 0;
  }
  return ok == 1;
}

bool bp_sweep_serial(const EdgeList& edges, const Eigen::VectorXd& node_j,
                     const Eigen::VectorXd& node_h, const MessageState& in, double damping,
                     MessageState& out) {
  out.dj.resize(edges.size());
  out.dh.resize(edges.size());
  bool ok = true;
  for (std::size_t e = 0; e < edges.size(); ++e)
    ok = bp_edge(edges, node_j, node_h, in, damping, out, e) && ok;
  return ok;
}

}  // namespace cdecomp::kernels
