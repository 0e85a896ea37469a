#include "cdecomp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdecomp/rng.hpp"

namespace cdecomp {

Eigen::VectorXd DecompositionModel::mean_or_zero() const {
  return mean.size() == 0 ? Eigen::VectorXd::Zero(dim()) : mean;
}

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::MarkovPositiveDefinite: return "A0:markov-pd";
    case Condition::OverallPositiveDefinite: return "A0:overall-pd";
    case Condition::OffDiagonalBound: return "A1:offdiag-bound";
    case Condition::ResidualDiagonalZero: return "A2:residual-diagonal";
    case Condition::ResidualSupport: return "A2:residual-support";
    case Condition::SignAgreement: return "A3:sign";
  }
  return "unknown";
}

namespace {

std::string describe(const std::vector<ConditionViolation>& v) {
  std::ostringstream out;
  out << "model violates " << v.size() << " condition(s):";
  for (const auto& x : v) {
    out << " " << condition_name(x.condition);
    if (x.row >= 0) out << "(" << x.row << "," << x.col << ")";
  }
  return out.str();
}

}  // namespace

InvalidModel::InvalidModel(std::vector<ConditionViolation> violations)
    : PreconditionViolated(describe(violations)), violations_(std::move(violations)) {}

std::vector<ConditionViolation> validate_model(const DecompositionModel& m, double eps_tie) {
  const Index p = m.dim();
  if (m.sigma_residual.dim() != p) {
    throw DimensionMismatch("j_markov and sigma_residual dimensions differ");
  }
  if (m.mean.size() != 0 && m.mean.size() != p) {
    throw DimensionMismatch("mean length differs from model dimension");
  }
  std::vector<ConditionViolation> out;
  const auto& j = m.j_markov.dense();
  const auto& r = m.sigma_residual.dense();

  if (!is_positive_definite(m.j_markov)) {
    out.push_back({Condition::MarkovPositiveDefinite, -1, -1, "J_M is not positive definite"});
  } else if (!is_positive_definite(inverse_pd(m.j_markov) - m.sigma_residual)) {
    out.push_back({Condition::OverallPositiveDefinite, -1, -1,
                   "J_M^{-1} - Sigma_R is not positive definite"});
  }
  if (!(m.lambda_star > 0.0)) {
    out.push_back({Condition::OffDiagonalBound, -1, -1, "lambda* must be positive"});
  }
  for (Index i = 0; i < p; ++i) {
    if (r(i, i) != 0.0) {
      out.push_back({Condition::ResidualDiagonalZero, i, i, "nonzero residual variance"});
    }
  }
  for (Index i = 0; i < p; ++i) {
    for (Index k = i + 1; k < p; ++k) {
      const double a = std::abs(j(i, k));
      if (a > m.lambda_star + eps_tie) {
        out.push_back({Condition::OffDiagonalBound, i, k, "|J_ij| exceeds lambda*"});
      }
      const bool clipped = std::abs(a - m.lambda_star) <= eps_tie;
      const bool has_residual = r(i, k) != 0.0;
      if (clipped != has_residual) {
        out.push_back({Condition::ResidualSupport, i, k,
                       clipped ? "clipped entry without residual" : "residual on unclipped entry"});
      }
      if (r(i, k) * j(i, k) < 0.0) {
        out.push_back({Condition::SignAgreement, i, k, "residual sign opposes J_M"});
      }
    }
  }
  return out;
}

DecompositionModel chain_model(const std::array<double, 3>& rho, double residual_value) {
  for (const double x : rho) {
    if (!(std::abs(x) < 1.0)) throw PreconditionViolated("chain correlations must satisfy |rho| < 1");
  }
  if (!(std::abs(rho[0]) > std::abs(rho[1]) && std::abs(rho[0]) > std::abs(rho[2]))) {
    throw PreconditionViolated(
        "chain requires |rho_1| strictly largest so that only edge (0,1) is clipped");
  }
  // Unit-variance Gaussian Markov chain: the precision is tridiagonal with
  // J_{i,i+1} = -rho_i / (1 - rho_i^2).
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4, 4);
  for (Index i = 0; i < 4; ++i) j(i, i) = 1.0;
  for (Index e = 0; e < 3; ++e) {
    const double r = rho[static_cast<std::size_t>(e)];
    const double denom = 1.0 - r * r;
    j(e, e + 1) = j(e + 1, e) = -r / denom;
    j(e, e) += r * r / denom;
    j(e + 1, e + 1) += r * r / denom;
  }
  Eigen::MatrixXd res = Eigen::MatrixXd::Zero(4, 4);
  res(0, 1) = res(1, 0) = residual_value;

  DecompositionModel m{SymmetricMatrix(j), SymmetricMatrix(res), std::abs(j(0, 1)), {}, {}};
  m.generator.name = "chain";
  m.generator.params = {{"rho1", rho[0]}, {"rho2", rho[1]}, {"rho3", rho[2]},
                        {"residual", residual_value}};
  if (auto violations = validate_model(m); !violations.empty()) {
    throw InvalidModel(std::move(violations));
  }
  return m;
}

DecompositionModel grid_model(int q, std::uint64_t seed, const GridOptions& opt) {
  if (q < 2) throw PreconditionViolated("grid_model requires q >= 2");
  if (opt.clip_fraction < 0.0 || opt.clip_fraction > 1.0) {
    throw PreconditionViolated("clip_fraction must lie in [0, 1]");
  }
  constexpr double kTieGap = 1e-6;
  if (!(opt.magnitude_lo > 0.0 && opt.magnitude_lo <= opt.magnitude_hi - kTieGap)) {
    throw PreconditionViolated("magnitude range must satisfy 0 < lo <= hi - 1e-6");
  }
  const Index p = static_cast<Index>(q) * q;
  std::vector<IndexPair> edges;
  for (int r = 0; r < q; ++r) {
    for (int c = 0; c < q; ++c) {
      const Index node = static_cast<Index>(r) * q + c;
      if (c + 1 < q) edges.push_back({node, node + 1});
      if (r + 1 < q) edges.push_back({node, node + q});
    }
  }
  CounterRng rng(seed);

  // Partial Fisher-Yates: the first num_clip entries of order are the clipped edges.
  const auto num_edges = edges.size();
  const auto num_clip = static_cast<std::size_t>(
      std::ceil(opt.clip_fraction * static_cast<double>(num_edges) - 1e-9));
  std::vector<std::size_t> order(num_edges);
  for (std::size_t k = 0; k < num_edges; ++k) order[k] = k;
  for (std::size_t k = 0; k < num_clip; ++k) {
    const auto pick = k + static_cast<std::size_t>(rng.below(num_edges - k));
    std::swap(order[k], order[pick]);
  }
  std::vector<char> clipped(num_edges, 0);
  for (std::size_t k = 0; k < num_clip; ++k) clipped[order[k]] = 1;

  Eigen::MatrixXd offdiag = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd residual = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t k = 0; k < num_edges; ++k) {
    const auto [a, b] = edges[k];
    const double s = rng.sign();
    const double mag =
        clipped[k] ? opt.magnitude_hi : rng.uniform(opt.magnitude_lo, opt.magnitude_hi - kTieGap);
    offdiag(a, b) = offdiag(b, a) = s * mag;
  }
  for (std::size_t k = 0; k < num_edges; ++k) {
    if (!clipped[k]) continue;
    const auto [a, b] = edges[k];
    const double s = offdiag(a, b) > 0.0 ? 1.0 : -1.0;
    residual(a, b) = residual(b, a) = s * rng.uniform(opt.residual_lo, opt.residual_hi);
  }

  double boost = opt.boost_start;
  Eigen::MatrixXd j = offdiag + boost * Eigen::MatrixXd::Identity(p, p);
  while (min_eigenvalue(SymmetricMatrix(j)) < opt.pd_margin) {
    boost *= 2.0;
    j = offdiag + boost * Eigen::MatrixXd::Identity(p, p);
  }
  const SymmetricMatrix j_markov(j);
  const SymmetricMatrix sigma_m = inverse_pd(j_markov);
  double residual_scale = 1.0;
  int shrinks = 0;
  while (min_eigenvalue(sigma_m - SymmetricMatrix(residual_scale * residual)) < opt.pd_margin) {
    if (++shrinks > opt.max_residual_shrinks) {
      throw InfeasibleConstraints("grid_model: residual shrink budget exhausted");
    }
    residual_scale *= 0.9;
  }

  DecompositionModel m{j_markov, SymmetricMatrix(residual_scale * residual), opt.magnitude_hi, {},
                       {}};
  m.generator.name = "grid";
  m.generator.seed = seed;
  m.generator.params = {{"q", q},
                        {"clip_fraction", opt.clip_fraction},
                        {"magnitude_lo", opt.magnitude_lo},
                        {"magnitude_hi", opt.magnitude_hi},
                        {"residual_lo", opt.residual_lo},
                        {"residual_hi", opt.residual_hi},
                        {"diagonal_boost", boost},
                        {"residual_scale", residual_scale},
                        {"clipped_edges", static_cast<double>(num_clip)}};
  if (auto violations = validate_model(m); !violations.empty()) {
    throw InvalidModel(std::move(violations));
  }
  return m;
}

SymmetricMatrix true_covariance(const DecompositionModel& m) {
  SymmetricMatrix sigma = inverse_pd(m.j_markov) - m.sigma_residual;
  if (!is_positive_definite(sigma)) {
    throw NotPositiveDefinite("true_covariance: J_M^{-1} - Sigma_R is not positive definite");
  }
  return sigma;
}

EdgePartition partition_pairs(const DecompositionModel& m) {
  const Index p = m.dim();
  const auto& j = m.j_markov.dense();
  const auto& r = m.sigma_residual.dense();
  std::vector<IndexPair> res, markov, non_edges;
  Index degree = 0;
  for (Index col = 0; col < p; ++col) {
    Index deg = 0;
    for (Index row = 0; row < p; ++row) {
      const bool in_markov = row == col || j(row, col) != 0.0;
      if (in_markov) ++deg;
      if (r(row, col) != 0.0) {
        res.push_back({row, col});
      } else if (in_markov) {
        markov.push_back({row, col});
      } else {
        non_edges.push_back({row, col});
      }
    }
    degree = std::max(degree, deg);
  }
  return {PairIndexSet(p, std::move(res)), PairIndexSet(p, std::move(markov)),
          PairIndexSet(p, std::move(non_edges)), degree};
}

IncoherenceReport incoherence_report(const DecompositionModel& m, double m_param, double tau,
                                     Index n, double c6, double c7) {
  if (!(m_param > 4.0)) throw PreconditionViolated("covariance control requires m > 4");
  if (n < 1) throw PreconditionViolated("incoherence_report requires n >= 1");
  const Index p = m.dim();
  const SymmetricMatrix sigma_m = inverse_pd(m.j_markov);
  const EdgePartition part = partition_pairs(m);
  if (part.markov_only.empty()) throw SingularSubmatrix("S is empty; Gamma_SS is undefined");

  const Eigen::MatrixXd g_ss = hessian_submatrix(sigma_m, part.markov_only, part.markov_only);
  Eigen::LLT<Eigen::MatrixXd> llt(g_ss);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
    throw SingularSubmatrix("Gamma_SS is numerically singular");
  }
  const Eigen::MatrixXd g_ss_inv = llt.solve(Eigen::MatrixXd::Identity(g_ss.rows(), g_ss.cols()));
  const Eigen::MatrixXd g_sr = hessian_submatrix(sigma_m, part.markov_only, part.residual);
  const Eigen::MatrixXd g_ns = hessian_submatrix(sigma_m, part.non_edges, part.markov_only);
  const Eigen::MatrixXd g_nr = hessian_submatrix(sigma_m, part.non_edges, part.residual);

  IncoherenceReport rep;
  const Eigen::MatrixXd leverage = g_ns * g_ss_inv;
  rep.incoherence_markov = inf_operator_norm(leverage);
  rep.incoherence_cross = inf_operator_norm(leverage * g_sr - g_nr);
  rep.k_ss = inf_operator_norm(g_ss_inv);
  rep.k_ssr = inf_operator_norm(g_ss_inv * g_sr);
  rep.k_m = inf_operator_norm(sigma_m.dense());
  rep.m_param = m_param;
  rep.max_degree = part.max_degree;

  // The incoherence bound is monotone in alpha, so the largest feasible alpha is closed form.
  rep.alpha = std::clamp(1.0 - std::max(rep.incoherence_cross, rep.incoherence_markov), 0.0, 1.0);
  rep.a4_satisfied = rep.alpha > 0.0 && rep.k_ssr < 0.25;
  if (rep.alpha > 0.0) {
    rep.a5_bound = (m_param - 4.0) * rep.alpha / (4.0 * (m_param - (m_param - 1.0) * rep.alpha));
    rep.a5_satisfied = rep.k_ss <= rep.a5_bound;
  }
  const double log_term = std::log(4.0) + tau * std::log(static_cast<double>(p));
  const double d = static_cast<double>(rep.max_degree);
  const double nn = static_cast<double>(n);
  rep.a6_margin = min_eigenvalue(true_covariance(m)) -
                  (c6 * d * std::sqrt(log_term / nn) + c7 * d * d * log_term / nn);
  return rep;
}

}  // namespace cdecomp
