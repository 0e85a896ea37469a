#include <doctest.h>

#include "cdecomp/kernels.hpp"
#include "helpers.hpp"

using namespace cdecomp;
using namespace cdecomp::kernels;
using Eigen::MatrixXd;

TEST_CASE("prox_box_l1 entry rules") {
  MatrixXd v(3, 3);
  v << 5.0, 0.3, -0.05, 0.3, -4.0, 1.5, -0.05, 1.5, 0.2;
  ProxPlan plan;
  plan.shrink = 0.1;
  plan.offdiag_cap = 1.0;
  plan.diag_cap = 2.0;
  MatrixXd out;
  prox_box_l1(v, plan, out);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 1) == -2.0);
  CHECK(out(2, 2) == 0.2);
  CHECK(out(0, 1) == doctest::Approx(0.2));
  CHECK(out(0, 2) == 0.0);
  CHECK(out(1, 2) == 1.0);

  plan.rules.resize(3, 3);
  plan.rules.setConstant(EntryRule::Penalized);
  plan.rules.diagonal().setConstant(EntryRule::Diagonal);
  plan.rules(0, 1) = plan.rules(1, 0) = EntryRule::Fixed;
  plan.fixed_value = MatrixXd::Zero(3, 3);
  plan.fixed_value(0, 1) = plan.fixed_value(1, 0) = -0.7;
  prox_box_l1(v, plan, out);
  CHECK(out(0, 1) == -0.7);
  CHECK(out(1, 2) == 1.0);

  plan.rules.resize(2, 2);
  CHECK_THROWS(prox_box_l1(v, plan, out));
}

TEST_CASE("parallel kernels agree with the serial references") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Index p = 10 + static_cast<Index>(seed) * 7;
    const MatrixXd v = testing::random_matrix(p, p, seed);
    ProxPlan plan;
    plan.shrink = 0.2;
    plan.offdiag_cap = 0.6;
    plan.diag_cap = 0.9;
    MatrixXd a, b;
    prox_box_l1(v, plan, a);
    prox_box_l1_serial(v, plan, b);
    CHECK(a == b);

    const MatrixXd data = testing::random_matrix(200 + static_cast<Index>(seed), p, seed + 50);
    gram(data, a);
    gram_serial(data, b);
    CHECK(max_abs_entry(a - b) <= 1e-12 * max_abs_entry(b));
    CHECK(a == a.transpose());

    const auto s = testing::random_spd(6, seed);
    const auto rows = PairIndexSet::all_pairs(6);
    const PairIndexSet cols(6, {{0, 1}, {2, 3}, {5, 5}});
    kronecker_gather(s.dense(), rows.pairs(), cols.pairs(), a);
    kronecker_gather_serial(s.dense(), rows.pairs(), cols.pairs(), b);
    CHECK(a == b);
  }
}

TEST_CASE("edge list pairs each edge with its reverse") {
  MatrixXd j = MatrixXd::Identity(4, 4);
  j(0, 1) = j(1, 0) = 0.3;
  j(1, 3) = j(3, 1) = -0.2;
  const auto e = EdgeList::from_matrix(j);
  REQUIRE(e.size() == 4);
  for (std::size_t k = 0; k < e.size(); ++k) {
    const auto r = e.reverse[k];
    CHECK(e.src[r] == e.dst[k]);
    CHECK(e.dst[r] == e.src[k]);
    CHECK(e.weight[k] == j(e.src[k], e.dst[k]));
  }
  j(2, 3) = 0.5;  // one-sided entry
  CHECK_THROWS(EdgeList::from_matrix(j));
}

TEST_CASE("bp_sweep parallel matches serial") {
  MatrixXd j = MatrixXd::Identity(30, 30) * 2.0;
  for (Index i = 0; i + 1 < 30; ++i) j(i, i + 1) = j(i + 1, i) = 0.4;
  const auto e = EdgeList::from_matrix(j);
  MessageState in{std::vector<double>(e.size(), 0.01), std::vector<double>(e.size(), -0.02)};
  Eigen::VectorXd node_j = j.diagonal(), node_h = Eigen::VectorXd::LinSpaced(30, 0.0, 1.0);
  MessageState a, b;
  CHECK(bp_sweep(e, node_j, node_h, in, 0.25, a));
  CHECK(bp_sweep_serial(e, node_j, node_h, in, 0.25, b));
  CHECK(a.dj == b.dj);
  CHECK(a.dh == b.dh);

  node_j(3) = -1.0;
  CHECK_FALSE(bp_sweep(e, node_j, node_h, in, 0.0, a));
  CHECK_FALSE(bp_sweep_serial(e, node_j, node_h, in, 0.0, b));
}
