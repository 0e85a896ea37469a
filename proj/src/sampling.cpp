#include "cdecomp/sampling.hpp"

#include <cmath>

#include "cdecomp/kernels.hpp"
#include "cdecomp/rng.hpp"

namespace cdecomp {

SampleSet draw_samples(const DecompositionModel& m, Index n, std::uint64_t seed) {
  if (n < 1) throw PreconditionViolated("draw_samples requires n >= 1");
  const SymmetricMatrix sigma = true_covariance(m);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.dense());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("draw_samples: covariance factorization failed");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  const Index p = m.dim();

  CounterRng rng(seed);
  Eigen::MatrixXd z(n, p);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < p; ++i) z(k, i) = rng.normal();

  SampleSet s;
  s.data = z * lower.transpose();
  s.data.rowwise() += m.mean_or_zero().transpose();
  s.seed = seed;
  s.provenance = m.generator.name;
  return s;
}

SymmetricMatrix sample_covariance(const SampleSet& s) {
  if (s.n() < 1) throw PreconditionViolated("sample_covariance requires n >= 1");
  Eigen::MatrixXd g;
  kernels::gram(s.data, g);
  return SymmetricMatrix(g / static_cast<double>(s.n()));
}

SymmetricMatrix sample_covariance_centered(const SampleSet& s) {
  if (s.n() < 1) throw PreconditionViolated("sample_covariance requires n >= 1");
  const Eigen::RowVectorXd mean = s.data.colwise().mean();
  const Eigen::MatrixXd centered = s.data.rowwise() - mean;
  Eigen::MatrixXd g;
  kernels::gram(centered, g);
  return SymmetricMatrix(g / static_cast<double>(s.n()));
}

double gamma_schedule(double c_gamma, double p, double n) {
  if (!(p >= 2.0) || !(n >= 1.0) || !(c_gamma > 0.0)) {
    throw PreconditionViolated("gamma_schedule requires p >= 2, n >= 1, c_gamma > 0");
  }
  return c_gamma * std::sqrt(std::log(p) / n);
}

double gaussian_tail_delta(double q, double r, Index n) {
  return std::sqrt(2.0 * q * q * std::log(4.0 * r) / static_cast<double>(n));
}

}  // namespace cdecomp
