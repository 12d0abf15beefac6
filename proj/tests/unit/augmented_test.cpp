#include <random>

#include <gtest/gtest.h>

#include "rppac/augmented.hpp"
#include "rppac/checks.hpp"
#include "test_support.hpp"

namespace rppac {
namespace {

using testing::fig1;
using testing::index_init;
using testing::two_node;

DelaySchedule uniform(const Digraph& g, int tau, std::uint64_t seed) {
  DelaySpec spec;
  spec.kind = DelayKind::uniform_iid;
  spec.tau_bar = tau;
  spec.seed = seed;
  return make_schedule(spec, g);
}

DelaySchedule lagging_pair(const Digraph& g) {
  DelaySpec spec;
  spec.kind = DelayKind::constant;
  spec.tau_bar = 1;
  spec.per_link_bounds[{1, 0}] = 0;
  return make_schedule(spec, g);
}

TEST(SnapshotMatrices, DelayFreeCollapse) {
  const Digraph g = fig1();
  const auto sm = build_snapshot_matrices(g, snapshot_at(make_schedule(DelaySpec{}, g), 0), 0.1);
  EXPECT_EQ(sm.augmented_size(), 10);
  EXPECT_TRUE(sm.R_tilde.isApprox(build_pull_weights(g), 1e-15));
  EXPECT_TRUE(sm.C_tilde.isApprox(build_push_weights(g), 1e-15));

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(10, 10);
  Eigen::MatrixXd want(20, 20);
  want << build_pull_weights(g), 0.1 * I, I - build_pull_weights(g), build_push_weights(g) - 0.1 * I;
  EXPECT_LT((assemble_M(sm) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SnapshotMatrices, LaggingPairAtStepOne) {
  const Digraph g = two_node();
  const auto sm = build_snapshot_matrices(g, snapshot_at(lagging_pair(g), 1), 0.1);
  // Node 1 gets exactly one message (from node 2, sent at k=0): a_1 = 1.
  EXPECT_DOUBLE_EQ(sm.pull_layer(0)(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(sm.pull_layer(0)(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(sm.pull_layer(1)(0, 1), 0.5);
  // Push from node 2 to node 1 lands in the delay-1 layer.
  EXPECT_DOUBLE_EQ(sm.push_layer(1)(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(sm.push_layer(0)(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(sm.push_layer(0)(1, 0), 0.5);

  // At k=0 node 1 hears nothing yet.
  const auto first = build_snapshot_matrices(g, snapshot_at(lagging_pair(g), 0), 0.1);
  EXPECT_DOUBLE_EQ(first.pull_layer(0)(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(first.pull_layer(1)(0, 1), 0.0);
}

TEST(SnapshotMatrices, BlockStructure) {
  const Digraph g = fig1();
  std::mt19937_64 rng(8);
  const int n = 10, tau = 3;
  const auto sm = build_snapshot_matrices(g, random_snapshot(g, tau, rng), 0.2);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (int d = 1; d <= tau; ++d) {
    EXPECT_TRUE(sm.R_tilde.block(d * n, (d - 1) * n, n, n).isIdentity());
    EXPECT_TRUE(sm.C_tilde.block((d - 1) * n, d * n, n, n).isIdentity());
  }
  EXPECT_TRUE(sm.H.topLeftCorner(n, n).isApprox(0.2 * I));
  EXPECT_EQ(sm.H.cwiseAbs().sum(), 0.2 * n);
  EXPECT_TRUE(sm.J.topLeftCorner(n, n).isApprox(I - sm.pull_layer(0)));
  for (int d = 1; d <= tau; ++d) EXPECT_TRUE(sm.J.block(0, d * n, n, n).isApprox(-sm.pull_layer(d)));
  EXPECT_EQ(sm.J.bottomRows(n * tau).cwiseAbs().sum(), 0.0);
}

TEST(SnapshotMatrices, StochasticityOnRandomSnapshots) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Digraph g = testing::random_strongly_connected(2 + trial % 7, 0.3, rng);
    const int tau = trial % 6;
    const auto sm = build_snapshot_matrices(g, random_snapshot(g, tau, rng), 0.05);
    EXPECT_LE(row_sum_error(sm.R_tilde), 1e-12);
    EXPECT_LE(col_sum_error(sm.C_tilde), 1e-12);
    EXPECT_TRUE(single_push_layer_per_edge(g, sm));
    Eigen::MatrixXd stacked(sm.augmented_size(), g.size());
    for (int d = 0; d <= tau; ++d) stacked.middleRows(d * g.size(), g.size()) = sm.push_layer(d);
    EXPECT_LE(col_sum_error(stacked), 1e-12);
  }
}

TEST(SnapshotMatrices, RejectsDoubleSendDelay) {
  const Digraph g = two_node();
  ArrivalSnapshot snap(g.edge_count(), 2);
  snap.set_send_delay(0, 0);
  snap.set_send_delay(1, 0);
  EXPECT_NO_THROW(build_snapshot_matrices(g, snap, 0.1));
  snap.set_send_delay(0, 2);
  EXPECT_THROW(build_snapshot_matrices(g, snap, 0.1), snapshot_error);
  ArrivalSnapshot none(g.edge_count(), 2);
  EXPECT_THROW(build_snapshot_matrices(g, none, 0.1), snapshot_error);
  ArrivalSnapshot wrong_size(5, 2);
  EXPECT_THROW(build_snapshot_matrices(g, wrong_size, 0.1), snapshot_error);
}

TEST(AssembleM, SymmetricPairAndSizes) {
  const Digraph g = two_node();
  const auto sm = build_snapshot_matrices(g, snapshot_at(make_schedule(DelaySpec{}, g), 0), 0.1);
  const Eigen::MatrixXd M = assemble_M(sm);
  ASSERT_EQ(M.rows(), 4);
  EXPECT_TRUE(M.topLeftCorner(2, 2).isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  EXPECT_TRUE(M.topRightCorner(2, 2).isApprox(0.1 * Eigen::Matrix2d::Identity()));
  EXPECT_TRUE(M.bottomLeftCorner(2, 2).isApprox(Eigen::Matrix2d::Identity() - Eigen::Matrix2d::Constant(0.5)));
  EXPECT_TRUE(M.bottomRightCorner(2, 2).isApprox(Eigen::Matrix2d::Constant(0.5) - 0.1 * Eigen::Matrix2d::Identity()));

  std::mt19937_64 rng(1);
  const Digraph big = fig1();
  EXPECT_EQ(assemble_M(build_snapshot_matrices(big, random_snapshot(big, 5, rng), 0.1)).rows(), 120);

  auto broken = sm;
  broken.H = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_THROW(assemble_M(broken), std::invalid_argument);
}

TEST(AssembleM, ZeroGammaIsBlockLowerTriangular) {
  std::mt19937_64 rng(2);
  const Digraph g = fig1();
  const auto sm = build_snapshot_matrices(g, random_snapshot(g, 2, rng), 0.0);
  const Eigen::MatrixXd M = assemble_M(sm);
  EXPECT_EQ(M.topRightCorner(30, 30).cwiseAbs().sum(), 0.0);
}

TEST(SplitM, Properties) {
  std::mt19937_64 rng(3);
  const Digraph g = fig1();
  for (int tau : {0, 2, 5}) {
    const auto sm = build_snapshot_matrices(g, random_snapshot(g, tau, rng), 0.1);
    const auto [M0, M1] = split_M0_M1(sm);
    EXPECT_TRUE((M0 + M1).cwiseEqual(assemble_M(sm)).all());
    EXPECT_EQ((M1.array() != 0.0).count(), 10);
    EXPECT_EQ(M1.cwiseAbs().maxCoeff(), 0.1);
    EXPECT_EQ((M1 * M1).cwiseAbs().maxCoeff(), 0.0);
  }
  const auto flat = build_snapshot_matrices(g, random_snapshot(g, 2, rng), 0.0);
  const auto split = split_M0_M1(flat);
  EXPECT_EQ(split.M1.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(split.M0.cwiseEqual(assemble_M(flat)).all());
}

TEST(RunMatrixForm, LaggingPairHandTrace) {
  const Digraph g = two_node();
  const Trajectory t = run_matrix_form(g, lagging_pair(g), 0.1, Eigen::Vector2d(0.0, 2.0), 2);
  EXPECT_NEAR(t.x[2][0], 1.0, 1e-12);
  EXPECT_NEAR(t.x[2][1], 0.6, 1e-12);
  EXPECT_NEAR(t.s[2][0], -1.0, 1e-12);
  EXPECT_NEAR(t.s[2][1], 0.9, 1e-12);
  EXPECT_NEAR(t.inflight_surplus[2], 0.5, 1e-12);
}

TEST(RunMatrixForm, ZeroScheduleMatchesPpac) {
  const Digraph g = fig1();
  const auto d = max_difference(run_matrix_form(g, make_schedule(DelaySpec{}, g), 0.1, index_init(10), 300),
                                run_ppac(g, 0.1, index_init(10), 300));
  EXPECT_LT(d.x, 1e-12);
  EXPECT_LT(d.s, 1e-12);
}

TEST(RunMatrixForm, AgreesWithNodeSimulation) {
  const Digraph g = fig1();
  const auto delays = uniform(g, 2, 7);
  const Trajectory matrix = run_matrix_form(g, delays, 0.1, index_init(10), 300);
  const Trajectory node = run_rppac(g, delays, 0.1, index_init(10), 300);
  const auto d = max_difference(matrix, node);
  EXPECT_LT(d.x, 1e-10);
  EXPECT_LT(d.s, 1e-10);
  EXPECT_LT(conservation_drift(matrix), 1e-9);
  for (std::size_t k = 0; k < node.inflight_surplus.size(); ++k)
    EXPECT_NEAR(matrix.inflight_surplus[k], node.inflight_surplus[k], 1e-10);
}

TEST(RunMatrixForm, AgreesWithNodeSimulationOnRandomScenarios) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const Digraph g = testing::random_strongly_connected(2 + trial % 6, 0.3, rng);
    DelaySpec spec;
    spec.kind = trial % 3 == 0 ? DelayKind::constant : DelayKind::uniform_iid;
    spec.tau_bar = trial % 5;
    spec.seed = rng();
    if (trial % 4 == 1 && g.edge_count() > 0) {
      const Edge e = g.edges().front();
      spec.per_link_bounds[{e.receiver, e.sender}] = 0;
    }
    const auto delays = make_schedule(spec, g);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Random(g.size()) * 5.0;
    const double gamma = 0.9 * min_push_weight(build_push_weights(g));
    const auto d = max_difference(run_matrix_form(g, delays, gamma, x0, 80), run_rppac(g, delays, gamma, x0, 80));
    EXPECT_LT(d.x, 1e-10) << "trial " << trial;
    EXPECT_LT(d.s, 1e-10) << "trial " << trial;
  }
}

TEST(WordProducts, SingleDelayFreeStep) {
  const Digraph g = fig1();
  const auto w = word_products(g, make_schedule(DelaySpec{}, g), 0.1, 0, 1);
  EXPECT_TRUE(w.R_bar.isApprox(build_pull_weights(g)));
  EXPECT_TRUE(w.E_bar.isApprox(build_push_weights(g) - 0.1 * Eigen::MatrixXd::Identity(10, 10)));
  EXPECT_THROW(word_products(g, make_schedule(DelaySpec{}, g), 0.1, 0, 0), std::invalid_argument);
}

TEST(WordProducts, ProductsStayStochasticAndContract) {
  const Digraph g = fig1();
  for (std::uint64_t seed : {1u, 2u}) {
    const auto w = word_products(g, uniform(g, 2, seed), 0.1, 10, 3);
    EXPECT_LE(row_sum_error(w.R_bar), 1e-12);
    // Every column of the surplus word loses at least a gamma fraction.
    EXPECT_LE(w.E_bar.colwise().sum().maxCoeff(), 0.9 + 1e-12);
  }
}

}  // namespace
}  // namespace rppac
