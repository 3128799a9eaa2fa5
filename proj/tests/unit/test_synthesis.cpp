#include <gtest/gtest.h>

#include "rlfalsify/attack.hpp"
#include "rlfalsify/errors.hpp"
#include "rlfalsify/qlearning.hpp"
#include "rlfalsify/synthesis.hpp"
#include "support/generators.hpp"

namespace rlfalsify {
namespace {

bool oracle_reaches(const Mdp& mdp, const CostTable& g, const Policy& target) {
  return greedy_policy(falsified_q_fixed_point(mdp, g)) == target;
}

TEST(TargetConditions, TruthfulCostsAndOptimalTarget) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Mdp mdp = testing::random_mdp(rng, 4, 3, 0.9);
    const Policy optimal = greedy_policy(q_value_iteration(mdp, mdp.costs));
    EXPECT_TRUE(check_target_conditions(mdp, mdp.costs, optimal).satisfied);
    const Policy other = testing::random_policy_except(rng, mdp, optimal);
    const auto rep = check_target_conditions(mdp, mdp.costs, other);
    EXPECT_FALSE(rep.satisfied);
    EXPECT_LE(rep.min_slack(), 0.0);
  }
}

TEST(TargetConditions, AgreeWithFixedPointOracle) {
  Rng rng(2);
  int positives = 0;
  int negatives = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Mdp mdp = testing::random_mdp(rng, 2 + trial % 4, 2 + trial % 2, trial % 2 ? 0.5 : 0.9, 0, 10, true);
    const Policy target = testing::random_policy(rng, mdp);
    // alternate between arbitrary tables and tables near a successful attack
    CostTable g = testing::random_table(rng, mdp, -10, 10);
    if (trial % 2) g = synthesize_full_attack(mdp, target, 0.1) + testing::random_table(rng, mdp, -0.2, 0.2);
    const bool predicted = check_target_conditions(mdp, g, target).satisfied;
    EXPECT_EQ(predicted, oracle_reaches(mdp, g, target)) << "trial " << trial;
    (predicted ? positives : negatives)++;
  }
  EXPECT_GT(positives, 50);
  EXPECT_GT(negatives, 50);
}

TEST(FullAttack, ReachesEveryTarget) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Mdp mdp = testing::random_mdp(rng, 4, 3, 0.9, 0, 10, trial % 2 == 1);
    const Policy target = testing::random_policy(rng, mdp);
    const CostTable g = synthesize_full_attack(mdp, target, 0.1);
    const auto rep = check_target_conditions(mdp, g, target);
    EXPECT_TRUE(rep.satisfied);
    EXPECT_TRUE(oracle_reaches(mdp, g, target));
    for (const auto& s : rep.slacks) EXPECT_GE(s.slack, 0.1 * (1 - 1e-6));
    for (int i = 0; i < 4; ++i) EXPECT_EQ(g(i, target(i)), mdp.costs(i, target(i)));
  }
}

TEST(FullAttack, SlackEqualsMarginForTinyMargins) {
  Rng rng(4);
  const Mdp mdp = testing::random_mdp(rng, 3, 3, 0.8);
  const Policy target = testing::random_policy(rng, mdp);
  for (double margin : {1e-3, 1e-6}) {
    for (const auto& s : check_target_conditions(mdp, synthesize_full_attack(mdp, target, margin), target).slacks) {
      EXPECT_NEAR(s.slack, margin, 1e-9);
    }
  }
}

TEST(FullAttack, OptimalTargetStaysOptimal) {
  Rng rng(5);
  const Mdp mdp = testing::random_mdp(rng, 4, 3, 0.9);
  const Policy optimal = greedy_policy(q_value_iteration(mdp, mdp.costs));
  EXPECT_TRUE(oracle_reaches(mdp, synthesize_full_attack(mdp, optimal, 0.1), optimal));
}

TEST(FullAttack, RejectsNonPositiveMargin) {
  Rng rng(6);
  const Mdp mdp = testing::random_mdp(rng, 2, 2, 0.9);
  EXPECT_THROW(synthesize_full_attack(mdp, testing::all_first(mdp), 0.0), Error);
  EXPECT_THROW(synthesize_full_attack(mdp, testing::all_first(mdp), -1.0), Error);
}

TEST(Frechet, ZeroPerturbation) {
  Rng rng(7);
  const Mdp mdp = testing::random_mdp(rng, 4, 3, 0.9);
  EXPECT_EQ(sup_norm(frechet_derivative_apply(mdp, testing::random_policy(rng, mdp), zero_table(mdp))), 0.0);
}

TEST(Frechet, OffPolicySupportPassesThrough) {
  Rng rng(8);
  const Mdp mdp = testing::random_mdp(rng, 4, 3, 0.9, 0, 10, true);
  const Policy mu = testing::random_policy(rng, mdp);
  CostTable h = testing::random_table(rng, mdp, -1, 1);
  for (int i = 0; i < 4; ++i) h(i, mu(i)) = 0.0;
  EXPECT_LE(sup_distance(frechet_derivative_apply(mdp, mu, h), h), 1e-15);
}

TEST(Frechet, Linearity) {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Mdp mdp = testing::random_mdp(rng, 5, 3, 0.9, 0, 10, true);
    const Policy mu = testing::random_policy(rng, mdp);
    const CostTable h1 = testing::random_table(rng, mdp, -1, 1);
    const CostTable h2 = testing::random_table(rng, mdp, -1, 1);
    const double a = uniform(rng, -3, 3);
    const double b = uniform(rng, -3, 3);
    const QTable lhs = frechet_derivative_apply(mdp, mu, a * h1 + b * h2);
    const QTable rhs = a * frechet_derivative_apply(mdp, mu, h1) + b * frechet_derivative_apply(mdp, mu, h2);
    EXPECT_LE(sup_distance(lhs, rhs), 1e-12);
  }
}

TEST(Frechet, ExactWithinOnePolicyRegion) {
  Rng rng(10);
  int checked = 0;
  while (checked < 50) {
    const Mdp mdp = testing::random_mdp(rng, 4, 3, 0.9, 0, 10, true);
    const QTable q = falsified_q_fixed_point(mdp, mdp.costs);
    const Policy mu = greedy_policy(q);
    const CostTable h = testing::random_table(rng, mdp, -0.05, 0.05);
    const QTable q_h = falsified_q_fixed_point(mdp, mdp.costs + h);
    const PolicyRegion region(mu);
    if (!region.contains(q) || !region.contains(q_h)) continue;
    ++checked;
    EXPECT_LE(sup_distance(q_h - q, frechet_derivative_apply(mdp, mu, h)), 1e-8);
  }
}

Mdp chain3(double alpha) {
  Mdp mdp;
  mdp.num_states = 3;
  mdp.num_controls = 2;
  mdp.alpha = alpha;
  mdp.actions = {{0, 1}, {0, 1}, {0, 1}};
  mdp.transitions = {Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
  return mdp;
}

TEST(Partition, FullControlGivesEmptyH) {
  Rng rng(11);
  SynthesisProblem p{testing::random_mdp(rng, 4, 2, 0.9), {}, {3, 1, 0, 2}};
  p.target = testing::random_policy(rng, p.mdp);
  const auto sys = build_partitioned_system(p);
  EXPECT_EQ(sys.H.rows(), 0);
  EXPECT_EQ(sys.H.cols(), 4);
}

TEST(Partition, ZeroDiscountGivesIdentityProducts) {
  Rng rng(12);
  SynthesisProblem p{testing::random_mdp(rng, 4, 2, 0.9), {}, {1, 2}};
  p.mdp.alpha = 0.0;
  p.target = testing::random_policy(rng, p.mdp);
  const auto sys = build_partitioned_system(p);
  for (int u = 0; u < 2; ++u) {
    EXPECT_TRUE(sys.R[u].isApprox(Matrix::Identity(2, 2)));
    EXPECT_EQ(sys.M[u].norm(), 0.0);
    EXPECT_EQ(sys.Y[u].norm(), 0.0);
  }
}

TEST(Partition, BlocksReassemble) {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    SynthesisProblem p{testing::random_mdp(rng, n, 3, 0.9, 0, 10, true), {}, {uniform_index(rng, n)}};
    p.target = testing::random_policy(rng, p.mdp);
    const auto sys = build_partitioned_system(p);
    Matrix p_target(n, n);
    for (int i = 0; i < n; ++i) p_target.row(i) = p.mdp.transition_row(i, p.target(i));
    const Matrix resolvent = (Matrix::Identity(n, n) - 0.9 * p_target).inverse();
    int expected_rows = 0;
    for (int u = 0; u < 3; ++u) {
      EXPECT_LE((sys.reassemble(u) - sys.products[u]).lpNorm<Eigen::Infinity>(), 1e-12);
      for (int i = 0; i < n; ++i) {
        if (!p.mdp.costs.is_admissible(i, u)) continue;
        const Eigen::RowVectorXd direct =
            (Eigen::RowVectorXd::Unit(n, i) - 0.9 * p.mdp.transition_row(i, u)) * resolvent;
        EXPECT_LE((sys.products[u].row(i) - direct).lpNorm<Eigen::Infinity>(), 1e-12);
        if (i != p.controllable_states[0] && u != p.target(i)) ++expected_rows;
      }
    }
    EXPECT_EQ(sys.H.cols(), 1);
    EXPECT_EQ(sys.H.rows(), expected_rows);
  }
}

TEST(Gordan, OneByOneNegative) {
  const auto r = gordan_feasibility(Matrix::Constant(1, 1, -1.0));
  ASSERT_TRUE(r.feasible);
  EXPECT_FALSE(r.certificate);
  EXPECT_LT((Matrix::Constant(1, 1, -1.0) * *r.x)(0), 0.0);
}

TEST(Gordan, OneByOnePositiveIsFeasibleToo) {
  const auto r = gordan_feasibility(Matrix::Constant(1, 1, 2.0));
  ASSERT_TRUE(r.feasible);
  EXPECT_LT((Matrix::Constant(1, 1, 2.0) * *r.x)(0), 0.0);
}

TEST(Gordan, OppositeRowsAreInfeasible) {
  Matrix h(2, 1);
  h << 1, -1;
  const auto r = gordan_feasibility(h);
  ASSERT_FALSE(r.feasible);
  EXPECT_FALSE(r.x);
  ASSERT_TRUE(r.certificate);
  EXPECT_NEAR((*r.certificate)(0), 0.5, 1e-12);
  EXPECT_NEAR((*r.certificate)(1), 0.5, 1e-12);
}

TEST(Gordan, ZeroRowIsInfeasible) {
  Matrix h(2, 2);
  h << -1, 0, 0, 0;
  const auto r = gordan_feasibility(h);
  ASSERT_FALSE(r.feasible);
  EXPECT_LE((h.transpose() * *r.certificate).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Gordan, EmptyIsFeasible) { EXPECT_TRUE(gordan_feasibility(Matrix(0, 3)).feasible); }

TEST(Gordan, NegativeColumnGivesDirection) {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix h = testing::random_matrix(rng, 2 + trial % 6, 3, -5, 5);
    const int j = trial % 3;
    h.col(j) = -testing::random_matrix(rng, h.rows(), 1, 0.1, 2).col(0);
    const auto r = gordan_feasibility(h);
    ASSERT_TRUE(r.feasible);
    EXPECT_LT((h * *r.x).maxCoeff(), 0.0);
  }
}

TEST(Gordan, ExactlyOneAlternativeOnRandomInstances) {
  Rng rng(15);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix h = testing::random_matrix(rng, 1 + trial % 7, 1 + trial % 4, -1, 1);
    const auto r = gordan_feasibility(h);
    EXPECT_NE(r.x.has_value(), r.certificate.has_value());
    if (r.feasible) {
      ++feasible;
      EXPECT_LT((h * *r.x).maxCoeff(), 0.0);
      EXPECT_NEAR(-(h * *r.x).maxCoeff(), r.margin, 1e-12);
    } else {
      const Vector& y = *r.certificate;
      EXPECT_GE(y.minCoeff(), 0.0);
      EXPECT_NEAR(y.sum(), 1.0, 1e-12);
      EXPECT_LE((h.transpose() * y).lpNorm<Eigen::Infinity>(), 1e-8);
    }
  }
  EXPECT_GT(feasible, 30);
  EXPECT_LT(feasible, 270);
}

TEST(PartialAttack, FullControlMatchesFullAttack) {
  Rng rng(16);
  SynthesisProblem p{testing::random_mdp(rng, 3, 2, 0.9), {}, {0, 1, 2}};
  p.target = testing::random_policy(rng, p.mdp);
  const auto r = synthesize_partial_attack(p);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.g_tilde->values(), synthesize_full_attack(p.mdp, p.target, 0.1).values());
  EXPECT_TRUE(oracle_reaches(p.mdp, *r.g_tilde, p.target));
}

TEST(PartialAttack, UncontrolledStateRoutedThroughControlledOnes) {
  // States 1 and 2 are controllable; state 3 moves to state 1 under control 1
  // and to state 2 under control 2. The target sends state 3 to state 2, which
  // the true costs make expensive.
  Mdp mdp = chain3(0.9);
  for (int u = 0; u < 2; ++u) {
    mdp.transitions[u].row(0) << 0.5, 0.5, 0.0;
    mdp.transitions[u].row(1) << 0.5, 0.5, 0.0;
  }
  mdp.transitions[1].row(0) << 0.0, 0.5, 0.5;
  mdp.transitions[0].row(2) << 1.0, 0.0, 0.0;
  mdp.transitions[1].row(2) << 0.0, 1.0, 0.0;
  mdp.costs = zero_table(mdp);
  mdp.costs(0, 0) = 1;
  mdp.costs(0, 1) = 2;
  mdp.costs(1, 0) = 5;
  mdp.costs(1, 1) = 6;
  mdp.costs(2, 0) = 1;
  mdp.costs(2, 1) = 1;
  const SynthesisProblem p{mdp, Policy{{1, 0, 1}}, {0, 1}};
  ASSERT_FALSE(oracle_reaches(mdp, mdp.costs, p.target));
  const auto sys = build_partitioned_system(p);
  ASSERT_EQ(sys.H.rows(), 1);
  const auto r = synthesize_partial_attack(p);
  ASSERT_TRUE(r.feasible) << r.note;
  ASSERT_TRUE(r.scale);
  EXPECT_TRUE(oracle_reaches(mdp, *r.g_tilde, p.target));
  EXPECT_EQ((*r.g_tilde)(2, 0), 1.0);
  EXPECT_EQ((*r.g_tilde)(2, 1), 1.0);
  for (const auto& s : r.slacks) EXPECT_GE(s.slack, 0.1 * (1 - 1e-6));
}

TEST(PartialAttack, IsolatedUncontrolledStatesYieldCertificate) {
  // State 3 only ever returns to itself, so no controllable cost reaches it.
  Mdp mdp = chain3(0.9);
  for (int u = 0; u < 2; ++u) {
    mdp.transitions[u].row(0) << 0.5, 0.5, 0.0;
    mdp.transitions[u].row(1) << 0.3, 0.7, 0.0;
    mdp.transitions[u].row(2) << 0.0, 0.0, 1.0;
  }
  mdp.costs = zero_table(mdp);
  mdp.costs(2, 0) = 1.0;
  mdp.costs(2, 1) = 3.0;
  const SynthesisProblem p{mdp, Policy{{0, 0, 1}}, {0, 1}};
  const auto r = synthesize_partial_attack(p);
  EXPECT_FALSE(r.feasible);
  ASSERT_TRUE(r.certificate);
  EXPECT_FALSE(r.g_tilde);
  const auto sys = build_partitioned_system(p);
  EXPECT_LE((sys.H.transpose() * *r.certificate).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(PartialAttack, RandomFeasibleInstancesVerify) {
  Rng rng(17);
  int feasible = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SynthesisProblem p{testing::random_mdp(rng, 4, 2, 0.9), {}, {0, 1, 2}};
    p.target = testing::random_policy(rng, p.mdp);
    const auto r = synthesize_partial_attack(p);
    if (!r.feasible) {
      EXPECT_TRUE(r.certificate);
      continue;
    }
    ++feasible;
    EXPECT_TRUE(oracle_reaches(p.mdp, *r.g_tilde, p.target));
    EXPECT_EQ((*r.g_tilde)(3, 0), p.mdp.costs(3, 0));
    EXPECT_EQ((*r.g_tilde)(3, 1), p.mdp.costs(3, 1));
  }
  EXPECT_GT(feasible, 0);
}

TEST(PartialAttack, RejectsBadControllableStates) {
  Rng rng(18);
  SynthesisProblem p{testing::random_mdp(rng, 3, 2, 0.9), {}, {0, 0}};
  p.target = testing::all_first(p.mdp);
  EXPECT_THROW(synthesize_partial_attack(p), Error);
  p.controllable_states = {5};
  EXPECT_THROW(synthesize_partial_attack(p), Error);
  p.controllable_states = {0};
  p.margin = 0.0;
  EXPECT_THROW(synthesize_partial_attack(p), Error);
}

}  // namespace
}  // namespace rlfalsify
