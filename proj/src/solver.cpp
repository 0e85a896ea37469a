#include "cdecomp/solver.hpp"

#include <algorithm>
#include <cmath>

#include "cdecomp/errors.hpp"
#include "cdecomp/kernels.hpp"

namespace cdecomp {

namespace {

constexpr double kZeroEntry = 1e-8;
constexpr double kRhoMin = 1e-3;
constexpr double kRhoMax = 1e3;
constexpr double kDivergence = 1e12;

}  // namespace

double SolverConfig::tie_tolerance() const {
  if (eps_tie) return *eps_tie;
  return std::isfinite(lambda_off) ? 1e-4 * lambda_off : 0.0;
}

double SolverConfig::tie_tolerance_diag() const {
  return std::isfinite(lambda_on) ? 1e-4 * lambda_on : 0.0;
}

void SolverConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw PreconditionViolated("gamma must be >= 0");
  if (!(lambda_off > 0.0)) throw PreconditionViolated("lambda_off must be > 0");
  if (!(lambda_on > 0.0)) throw PreconditionViolated("lambda_on must be > 0");
  if (!(rho_admm > 0.0) || !std::isfinite(rho_admm)) {
    throw PreconditionViolated("rho_admm must be > 0");
  }
  if (max_iter < 1) throw PreconditionViolated("max_iter must be >= 1");
  if (!(eps_abs > 0.0) || !(eps_rel > 0.0)) {
    throw PreconditionViolated("eps_abs and eps_rel must be > 0");
  }
  if (std::isfinite(lambda_off)) {
    const double tie = tie_tolerance();
    if (!(tie > 0.0 && tie < lambda_off)) {
      throw PreconditionViolated("eps_tie must lie in (0, lambda_off)");
    }
  }
}

namespace {

struct AdmmState {
  Eigen::MatrixXd j;
  Eigen::MatrixXd z;
  Eigen::MatrixXd u;  // scaled dual: rho * u is the multiplier of J = Z
  double rho = 1.0;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<IterationRecord> trace;
};

// Minimizer of <S,J> - log det J + rho/2 ||J - (Z - U)||_F^2: with
// rho(Z - U) - S = Q diag(d) Q^T the solution is Q diag(theta) Q^T where
// theta solves rho*theta - 1/theta = d.
void logdet_prox(const Eigen::MatrixXd& s, const Eigen::MatrixXd& z, const Eigen::MatrixXd& u,
                 double rho, Eigen::MatrixXd& j) {
  const Eigen::MatrixXd target = rho * (z - u) - s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(target);
  if (es.info() != Eigen::Success) {
    throw EigenNonConvergence("ADMM J-step: eigensolver did not converge");
  }
  Eigen::VectorXd theta(target.rows());
  for (Index k = 0; k < theta.size(); ++k) {
    const double d = es.eigenvalues()(k);
    const double root = std::sqrt(d * d + 4.0 * rho);
    // Two algebraically equal forms; pick the one without cancellation.
    theta(k) = d >= 0.0 ? (d + root) / (2.0 * rho) : 2.0 / (root - d);
  }
  const auto& q = es.eigenvectors();
  j.noalias() = q * theta.asDiagonal() * q.transpose();
  j = 0.5 * (j + j.transpose()).eval();
}

AdmmState run_admm(const Eigen::MatrixXd& s, kernels::ProxPlan plan, const SolverConfig& cfg,
                   const Eigen::MatrixXd& j0) {
  const Index p = s.rows();
  const double sqrt_count = static_cast<double>(p);  // sqrt of the p^2 entries
  const double gamma = cfg.gamma;

  AdmmState st;
  st.rho = cfg.rho_admm;
  kernels::prox_box_l1(j0, [&] {
    auto pl = plan;
    pl.shrink = 0.0;
    return pl;
  }(), st.z);
  st.j = j0;
  {
    // Dual seeded from stationarity of the log-det term at J0, so a warm start
    // at the optimum is already a fixed point.
    Eigen::LLT<Eigen::MatrixXd> llt(j0);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("ADMM start is not positive definite");
    const Eigen::MatrixXd j0_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    st.u = (j0_inv - s) / st.rho;
  }

  Eigen::MatrixXd z_prev;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    logdet_prox(s, st.z, st.u, st.rho, st.j);
    if (!st.j.allFinite() || max_abs_entry(st.j) > kDivergence) {
      throw InfeasibleConstraints("ADMM iterates diverged");
    }

    z_prev = st.z;
    plan.shrink = gamma / st.rho;
    kernels::prox_box_l1(st.j + st.u, plan, st.z);
    st.u += st.j - st.z;

    st.primal_residual = (st.j - st.z).norm();
    st.dual_residual = st.rho * (st.z - z_prev).norm();
    st.iterations = k;
    if (cfg.record_trace) {
      st.trace.push_back({k, st.primal_residual, st.dual_residual, st.rho});
    }

    const double eps_pri = sqrt_count * cfg.eps_abs + cfg.eps_rel * std::max(st.j.norm(), st.z.norm());
    const double eps_dual = sqrt_count * cfg.eps_abs + cfg.eps_rel * st.rho * st.u.norm();
    if (st.primal_residual <= eps_pri && st.dual_residual <= eps_dual) {
      st.converged = true;
      break;
    }

    if (cfg.adapt_rho) {
      // Residual balancing; the scaled dual moves inversely to rho.
      if (st.primal_residual > 10.0 * st.dual_residual && st.rho * 2.0 <= kRhoMax) {
        st.rho *= 2.0;
        st.u /= 2.0;
      } else if (st.dual_residual > 10.0 * st.primal_residual && st.rho / 2.0 >= kRhoMin) {
        st.rho /= 2.0;
        st.u *= 2.0;
      }
    }
  }
  return st;
}

Eigen::MatrixXd default_start(const SymmetricMatrix& sigma_hat) {
  return Eigen::VectorXd(sigma_hat.dense().diagonal().cwiseInverse()).asDiagonal();
}

void require_positive_diagonal(const SymmetricMatrix& sigma_hat) {
  if (!(sigma_hat.dense().diagonal().minCoeff() > 0.0)) {
    throw NotPositiveDefinite("input covariance needs a strictly positive diagonal");
  }
}

// Z is the feasible iterate (exact zeros, exact clips); fall back to J if
// it is not positive definite, which happens only for unconverged runs.
SymmetricMatrix pick_estimate(const AdmmState& st) {
  SymmetricMatrix z(st.z);
  if (is_positive_definite(z)) return z;
  return SymmetricMatrix(st.j);
}

}  // namespace

SymmetricMatrix subgradient_certificate(const SymmetricMatrix& j_hat,
                                        const SymmetricMatrix& sigma_m_hat,
                                        const SymmetricMatrix& sigma_hat, double gamma) {
  const Index p = j_hat.dim();
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(p, p);
  for (Index c = 0; c < p; ++c) {
    for (Index r = 0; r < p; ++r) {
      if (r == c) continue;
      const double jv = j_hat(r, c);
      if (std::abs(jv) > kZeroEntry) {
        z(r, c) = jv > 0.0 ? 1.0 : -1.0;
      } else if (gamma > 0.0) {
        z(r, c) = std::clamp((sigma_m_hat(r, c) - sigma_hat(r, c)) / gamma, -1.0, 1.0);
      }
    }
  }
  return SymmetricMatrix(z);
}

ResidualExtraction extract_residual(const SymmetricMatrix& j_hat, const SymmetricMatrix& sigma_hat,
                                    const SymmetricMatrix& z_gamma, const SolverConfig& cfg) {
  const Index p = j_hat.dim();
  if (sigma_hat.dim() != p || z_gamma.dim() != p) {
    throw DimensionMismatch("extract_residual: dimension mismatch");
  }
  const SymmetricMatrix sigma_m = inverse_pd(j_hat);
  ResidualExtraction out;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, p);
  const double cap = cfg.lambda_off;
  const double tie = cfg.tie_tolerance();
  const double cap_on = cfg.lambda_on;
  const double tie_on = cfg.tie_tolerance_diag();

  auto assign = [&](Index a, Index b) {
    const double value = sigma_m(a, b) - sigma_hat(a, b) - cfg.gamma * z_gamma(a, b);
    out.clip_set.push_back({a, b});
    if (value * j_hat(a, b) < 0.0) {
      // Multipliers are nonnegative, so an opposing sign is noise at the clip boundary.
      if (std::abs(value) > kZeroEntry) out.sign_conflicts.push_back({a, b});
      return;
    }
    r(a, b) = r(b, a) = value;
  };

  for (Index a = 0; a < p; ++a) {
    // The diagonal rule mirrors the off-diagonal one (structured-noise variant).
    if (std::isfinite(cap_on) && j_hat(a, a) >= cap_on - tie_on) assign(a, a);
    if (!std::isfinite(cap)) continue;
    for (Index b = a + 1; b < p; ++b) {
      if (std::abs(j_hat(a, b)) >= cap - tie) assign(a, b);
    }
  }
  out.sigma_r = SymmetricMatrix(r);
  return out;
}

double kkt_residual(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& sigma_m_hat,
                    const SymmetricMatrix& sigma_r_hat, const SymmetricMatrix& z_gamma,
                    double gamma) {
  return max_abs_entry(sigma_hat.dense() - sigma_m_hat.dense() + sigma_r_hat.dense() +
                       gamma * z_gamma.dense());
}

double primal_objective(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j, double gamma) {
  return sigma_hat.dense().cwiseProduct(j.dense()).sum() - logdet_pd(j) +
         gamma * l1_offdiag(j.dense());
}

double duality_gap(const SolveResult& result, const SymmetricMatrix& sigma_hat,
                   const SolverConfig& cfg) {
  // Dual value: log det Sigma_M - lambda ||Sigma_R||_1,off (- lambda_on ||Sigma_R||_1,on).
  // At a KKT point S = J^{-1} - Sigma_R - gamma Z, so
  //   <S, J> = p - <Sigma_R, J> - gamma <Z, J> = p - lambda ||Sigma_R||_1 - gamma ||J||_1,off
  // because Sigma_R lives on |J_ij| = lambda with matching signs. Primal minus
  // dual therefore vanishes only after subtracting p.
  const auto penalty = [](double weight, double norm) { return norm == 0.0 ? 0.0 : weight * norm; };
  const double p = static_cast<double>(result.j_hat.dim());
  const double primal = primal_objective(sigma_hat, result.j_hat, cfg.gamma);
  const double dual = logdet_pd(result.sigma_m_hat) -
                      penalty(cfg.lambda_off, l1_offdiag(result.sigma_r_hat.dense())) -
                      penalty(cfg.lambda_on, l1_diag(result.sigma_r_hat.dense()));
  return primal - dual - p;
}

std::pair<bool, double> post_check_overall_pd(SolveResult& result) {
  const double min_eig = min_eigenvalue(result.sigma_m_hat - result.sigma_r_hat);
  result.min_eig_overall = min_eig;
  result.overall_pd = min_eig > 0.0;
  return {result.overall_pd, min_eig};
}

namespace {

SolveResult finish(const SymmetricMatrix& sigma_hat, const SolverConfig& cfg, AdmmState&& st) {
  SolveResult res;
  res.j_hat = pick_estimate(st);
  res.sigma_m_hat = inverse_pd(res.j_hat);
  res.iterations = st.iterations;
  res.converged = st.converged;
  res.primal_residual = st.primal_residual;
  res.dual_residual = st.dual_residual;
  res.rho_final = st.rho;
  res.trace = std::move(st.trace);
  res.objective = primal_objective(sigma_hat, res.j_hat, cfg.gamma);
  return res;
}

}  // namespace

SolveResult admm_solve(const SymmetricMatrix& sigma_hat, const SolverConfig& cfg,
                       const std::optional<SymmetricMatrix>& warm_start) {
  cfg.validate();
  require_positive_diagonal(sigma_hat);
  const Index p = sigma_hat.dim();
  if (warm_start && warm_start->dim() != p) {
    throw DimensionMismatch("warm start dimension differs from input");
  }

  kernels::ProxPlan plan;
  plan.offdiag_cap = cfg.lambda_off;
  plan.diag_cap = cfg.lambda_on;
  const Eigen::MatrixXd j0 = warm_start ? warm_start->dense() : default_start(sigma_hat);

  SolveResult res = finish(sigma_hat, cfg, run_admm(sigma_hat.dense(), plan, cfg, j0));
  res.z_gamma = subgradient_certificate(res.j_hat, res.sigma_m_hat, sigma_hat, cfg.gamma);
  auto extraction = extract_residual(res.j_hat, sigma_hat, res.z_gamma, cfg);
  res.sigma_r_hat = std::move(extraction.sigma_r);
  res.clip_set = std::move(extraction.clip_set);
  res.sign_conflicts = std::move(extraction.sign_conflicts);
  res.kkt_residual = kkt_residual(sigma_hat, res.sigma_m_hat, res.sigma_r_hat, res.z_gamma, cfg.gamma);
  res.duality_gap = duality_gap(res, sigma_hat, cfg);
  post_check_overall_pd(res);
  return res;
}

SoftThresholdResult soft_threshold_covariance(const SymmetricMatrix& sigma_hat, double gamma) {
  if (!(gamma >= 0.0)) throw PreconditionViolated("soft threshold requires gamma >= 0");
  const Index p = sigma_hat.dim();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, p);
  for (Index c = 0; c < p; ++c) {
    for (Index a = 0; a < p; ++a) {
      if (a == c) continue;
      const double x = sigma_hat(a, c);
      const double mag = std::max(std::abs(x) - gamma, 0.0);
      r(a, c) = x > 0.0 ? -mag : mag;
    }
  }
  Eigen::MatrixXd est = -r;
  est.diagonal() = sigma_hat.dense().diagonal();
  return {SymmetricMatrix(est), SymmetricMatrix(r)};
}

SolveResult witness_solve(const SymmetricMatrix& sigma_hat, const PairIndexSet& s_m,
                          const PairIndexSet& s_r, const SymmetricMatrix& signs,
                          const SolverConfig& cfg) {
  cfg.validate();
  require_positive_diagonal(sigma_hat);
  const Index p = sigma_hat.dim();
  if (s_m.dim() != p || (!s_r.empty() && s_r.dim() != p) || signs.dim() != p) {
    throw DimensionMismatch("witness_solve: dimension mismatch");
  }
  for (Index i = 0; i < p; ++i) {
    if (!s_m.contains({i, i})) throw PreconditionViolated("witness_solve: diagonal must lie in S_M");
  }
  for (const auto& pr : s_r) {
    if (pr.row == pr.col) throw PreconditionViolated("witness_solve: S_R must be off-diagonal");
    if (!s_m.contains(pr)) throw PreconditionViolated("witness_solve: S_R must be a subset of S_M");
    if (signs(pr.row, pr.col) == 0.0) {
      throw PreconditionViolated("witness_solve: sign on S_R must be nonzero");
    }
  }
  if (!s_r.empty() && !std::isfinite(cfg.lambda_off)) {
    throw PreconditionViolated("witness_solve: a nonempty S_R needs a finite lambda_off");
  }

  kernels::ProxPlan plan;
  plan.offdiag_cap = kInf;
  plan.diag_cap = cfg.lambda_on;
  plan.rules.resize(p, p);
  plan.fixed_value = Eigen::MatrixXd::Zero(p, p);
  for (Index c = 0; c < p; ++c) {
    for (Index r = 0; r < p; ++r) {
      if (r == c) {
        plan.rules(r, c) = kernels::EntryRule::Diagonal;
      } else if (s_r.contains({r, c}) || s_r.contains({c, r})) {
        plan.rules(r, c) = kernels::EntryRule::Fixed;
        plan.fixed_value(r, c) = cfg.lambda_off * (signs(r, c) > 0.0 ? 1.0 : -1.0);
      } else if (s_m.contains({r, c}) || s_m.contains({c, r})) {
        plan.rules(r, c) = kernels::EntryRule::Penalized;
      } else {
        plan.rules(r, c) = kernels::EntryRule::Fixed;
      }
    }
  }

  Eigen::MatrixXd j0 = default_start(sigma_hat);
  SolveResult res = finish(sigma_hat, cfg, run_admm(sigma_hat.dense(), plan, cfg, j0));
  res.z_gamma = subgradient_certificate(res.j_hat, res.sigma_m_hat, sigma_hat, cfg.gamma);

  // Equality multipliers on S_R carry any sign; they are the witness residual.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, p);
  for (const auto& pr : s_r) {
    const double v = res.sigma_m_hat(pr.row, pr.col) - sigma_hat(pr.row, pr.col) -
                     cfg.gamma * res.z_gamma(pr.row, pr.col);
    r(pr.row, pr.col) = r(pr.col, pr.row) = v;
    const IndexPair upper{std::min(pr.row, pr.col), std::max(pr.row, pr.col)};
    if (std::find(res.clip_set.begin(), res.clip_set.end(), upper) == res.clip_set.end()) {
      res.clip_set.push_back(upper);
    }
  }
  res.sigma_r_hat = SymmetricMatrix(r);

  // Stationarity only binds where J is free: the diagonal and S.
  Eigen::MatrixXd stationarity = sigma_hat.dense() - res.sigma_m_hat.dense() +
                                 res.sigma_r_hat.dense() + cfg.gamma * res.z_gamma.dense();
  for (Index c = 0; c < p; ++c)
    for (Index a = 0; a < p; ++a)
      if (plan.rules(a, c) == kernels::EntryRule::Fixed) stationarity(a, c) = 0.0;
  res.kkt_residual = max_abs_entry(stationarity);
  // Equality multipliers enter the dual through <Sigma_R, J_fixed> rather than
  // lambda ||Sigma_R||_1, since their signs are unconstrained.
  res.duality_gap = res.objective - logdet_pd(res.sigma_m_hat) +
                    res.sigma_r_hat.dense().cwiseProduct(res.j_hat.dense()).sum() -
                    static_cast<double>(p);
  post_check_overall_pd(res);
  return res;
}

}  // namespace cdecomp
