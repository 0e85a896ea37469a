// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "cdecomp/kernels.hpp"
#include "cdecomp/rng.hpp"

using namespace cdecomp;
using namespace cdecomp::kernels;
using Eigen::MatrixXd;

namespace {

MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
  CounterRng rng(seed);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

MatrixXd random_spd(Index p, std::uint64_t seed) {
  const MatrixXd a = random_matrix(p, p, seed);
  return a * a.transpose() / static_cast<double>(p) + MatrixXd::Identity(p, p);
}

MatrixXd grid_precision(int q) {
  const Index p = q * q;
  MatrixXd j = 4.0 * MatrixXd::Identity(p, p);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) {
      const Index i = r * q + c;
      if (c + 1 < q) j(i, i + 1) = j(i + 1, i) = 0.2;
      if (r + 1 < q) j(i, i + q) = j(i + q, i) = -0.2;
    }
  return j;
}

template <bool Parallel>
void BM_prox(benchmark::State& state) {
  const Index p = state.range(0);
  const MatrixXd v = random_matrix(p, p, 1);
  ProxPlan plan;
  plan.shrink = 0.1;
  plan.offdiag_cap = 0.3;
  plan.diag_cap = 1.0;
  MatrixXd out;
  for (auto _ : state) {
    if constexpr (Parallel) prox_box_l1(v, plan, out);
    else prox_box_l1_serial(v, plan, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_gram(benchmark::State& state) {
  const Index p = state.range(0);
  const MatrixXd data = random_matrix(20 * p, p, 2);
  MatrixXd out;
  for (auto _ : state) {
    if constexpr (Parallel) gram(data, out);
    else gram_serial(data, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_kronecker(benchmark::State& state) {
  const Index p = state.range(0);
  const MatrixXd sigma = random_spd(p, 3);
  const auto rows = PairIndexSet::all_pairs(p);
  const auto cols = PairIndexSet::diagonal(p);
  MatrixXd out;
  for (auto _ : state) {
    if constexpr (Parallel) kronecker_gather(sigma, rows.pairs(), cols.pairs(), out);
    else kronecker_gather_serial(sigma, rows.pairs(), cols.pairs(), out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_bp_sweep(benchmark::State& state) {
  const MatrixXd j = grid_precision(static_cast<int>(state.range(0)));
  const auto edges = EdgeList::from_matrix(j);
  const Eigen::VectorXd node_j = j.diagonal();
  const Eigen::VectorXd node_h = Eigen::VectorXd::Ones(j.rows());
  MessageState in{std::vector<double>(edges.size(), 0.0), std::vector<double>(edges.size(), 0.0)};
  MessageState out;
  for (auto _ : state) {
    bool ok = Parallel ? bp_sweep(edges, node_j, node_h, in, 0.0, out)
                       : bp_sweep_serial(edges, node_j, node_h, in, 0.0, out);
    benchmark::DoNotOptimize(ok);
    benchmark::DoNotOptimize(out.dj.data());
  }
}

}  // namespace

BENCHMARK(BM_prox<true>)->Name("prox/parallel")->Arg(100)->Arg(400)->Arg(900);
BENCHMARK(BM_prox<false>)->Name("prox/serial")->Arg(100)->Arg(400)->Arg(900);
BENCHMARK(BM_gram<true>)->Name("gram/parallel")->Arg(25)->Arg(100)->Arg(400);
BENCHMARK(BM_gram<false>)->Name("gram/serial")->Arg(25)->Arg(100)->Arg(400);
BENCHMARK(BM_kronecker<true>)->Name("kronecker_gather/parallel")->Arg(16)->Arg(36);
BENCHMARK(BM_kronecker<false>)->Name("kronecker_gather/serial")->Arg(16)->Arg(36);
BENCHMARK(BM_bp_sweep<true>)->Name("bp_sweep/parallel")->Arg(10)->Arg(30)->Arg(100);
BENCHMARK(BM_bp_sweep<false>)->Name("bp_sweep/serial")->Arg(10)->Arg(30)->Arg(100);

BENCHMARK_MAIN();
