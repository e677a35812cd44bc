#include "property_checks.hpp"

#include "ies/learner/adam.hpp"
#include "ies/learner/gae.hpp"
#include "ies/learner/mlp.hpp"
#include "ies/learner/policy.hpp"

#include <gtest/gtest.h>

using namespace ies;
using namespace ies::learn;

TEST(Mlp, ZeroParametersGiveZeroOutput) {
    Mlp net({3, 5, 2});
    const Vec y = net.forward(Vec(Vec::Constant(3, 0.7)));
    EXPECT_EQ(y, Vec::Zero(2));
}

TEST(Mlp, LinearIdentity) {
    Mlp net({1, 1});
    net.weight(0)(0, 0) = 1.0;
    for (double x : {-2.0, 0.0, 3.5}) EXPECT_EQ(net.forward(Vec(Vec::Constant(1, x)))[0], x);
}

TEST(Mlp, FiniteOutputAndShapes) {
    std::mt19937_64 rng(1);
    Mlp net({4, 128, 128, 8});
    net.init_orthogonal(rng, std::sqrt(2.0), 0.01);
    EXPECT_EQ(net.parameter_count(), (4 + 1) * 128 + (128 + 1) * 128 + (128 + 1) * 8);
    const Vec y = net.forward(Vec(Vec::Constant(4, 1e6)));
    EXPECT_EQ(y.size(), 8);
    EXPECT_TRUE(y.allFinite());
    EXPECT_THROW(net.forward(Vec(Vec::Zero(3))), ContractViolation);
    EXPECT_THROW(Mlp({4}), ContractViolation);
}

TEST(Mlp, OrthogonalInitIsOrthogonal) {
    std::mt19937_64 rng(2);
    Mlp net({4, 16, 3});
    net.init_orthogonal(rng, 1.0, 1.0);
    const Mat w0 = net.weight(0);
    EXPECT_LE((w0.transpose() * w0 - Mat::Identity(4, 4)).norm(), 1e-12);
    const Mat w1 = net.weight(1);
    EXPECT_LE((w1 * w1.transpose() - Mat::Identity(3, 3)).norm(), 1e-12);
}

TEST(Policy, LogProbAtMean) {
    const Vec mean = Vec::Constant(3, 0.2);
    const Vec log_std = (Vec(3) << -0.5, 0.0, 0.3).finished();
    EXPECT_NEAR(gaussian_log_prob(mean, log_std, mean), -log_std.sum() - 1.5 * std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(Policy, SampleDeterministicAndDegenerate) {
    const Vec mean = Vec::Constant(8, 0.3);
    std::mt19937_64 a(9), b(9);
    EXPECT_EQ(policy_sample(mean, Vec::Constant(8, -0.5), a).first, policy_sample(mean, Vec::Constant(8, -0.5), b).first);
    std::mt19937_64 c(9);
    const Vec near_mean = policy_sample(mean, Vec::Constant(8, -40.0), c).first;
    EXPECT_LE((near_mean - mean).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Policy, InactiveDimsPinnedToZero) {
    Vec active = Vec::Ones(8);
    active[6] = active[7] = 0.0;
    std::mt19937_64 rng(4);
    const auto [a, lp] = policy_sample(Vec::Constant(8, 0.5), Vec::Zero(8), active, rng);
    EXPECT_EQ(a[6], 0.0);
    EXPECT_EQ(a[7], 0.0);
    EXPECT_NEAR(lp, gaussian_log_prob(Vec::Constant(6, 0.5), Vec::Zero(6), a.head(6)), 1e-12);
}

TEST(Policy, RatioExamples) {
    EXPECT_EQ(prob_ratio(-3.2, -3.2), 1.0);
    EXPECT_NEAR(prob_ratio(std::log(2.0), 0.0), 2.0, 1e-15);
    EXPECT_NEAR(prob_ratio(0.0, std::log(4.0)), 0.25, 1e-15);
    EXPECT_TRUE(std::isfinite(prob_ratio(1e6, -1e6)));
}

TEST(Policy, SurrogateExamples) {
    EXPECT_EQ(clipped_surrogate(1.0, 1.0, 0.2), -1.0);
    EXPECT_DOUBLE_EQ(clipped_surrogate(2.0, 1.0, 0.2), -1.2);
    EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), 0.8);
    const Vec r = (Vec(3) << 1.0, 2.0, 0.5).finished();
    const Vec a = (Vec(3) << 1.0, 1.0, -1.0).finished();
    EXPECT_DOUBLE_EQ(clipped_surrogate(r, a, 0.2), (-1.0 - 1.2 + 0.8) / 3.0);
}

TEST(Policy, SurrogateIsPessimistic) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ratio(0.0, 3.0), adv(-5.0, 5.0);
    for (int k = 0; k < 10000; ++k) {
        const double r = ratio(rng), a = adv(rng);
        EXPECT_LE(clipped_objective(r, a, 0.2), r * a + 1e-12);
    }
}

TEST(Gradients, MatchCentralDifferences) {
    const checks::GradientReport rep = checks::gradient_suite(20, 11);
    EXPECT_LE(rep.log_prob, 1e-4);
    EXPECT_LE(rep.surrogate, 1e-4);
    EXPECT_LE(rep.critic, 1e-4);
}

TEST(Gradients, RatioIdentityExact) { EXPECT_EQ(checks::ratio_suite(1000, 13), 0); }

TEST(Gae, Examples) {
    const auto zero = gae_advantages({0, 0, 0}, {0, 0, 0}, 0.99, 0.95);
    EXPECT_EQ(zero.advantages, (std::vector<double>{0, 0, 0}));
    const auto sums = gae_advantages({1, 1, 1}, {0, 0, 0}, 1.0, 1.0);
    EXPECT_EQ(sums.advantages, (std::vector<double>{3, 2, 1}));
    const std::vector<double> r{1.0, -2.0, 0.5}, v{0.3, 0.1, -0.4};
    const auto td = gae_advantages(r, v, 0.9, 0.0);
    EXPECT_DOUBLE_EQ(td.advantages[0], 1.0 + 0.9 * 0.1 - 0.3);
    EXPECT_DOUBLE_EQ(td.advantages[1], -2.0 + 0.9 * -0.4 - 0.1);
    EXPECT_DOUBLE_EQ(td.advantages[2], 0.5 - -0.4);
    for (int t = 0; t < 3; ++t) EXPECT_DOUBLE_EQ(td.returns[t], td.advantages[t] + v[t]);
    EXPECT_THROW(gae_advantages({1.0}, {1.0, 2.0}, 0.9, 0.9), ContractViolation);
}

TEST(Gae, RewardToGoOracle) { EXPECT_LE(checks::gae_suite(100, 17), 1e-9); }

TEST(Gae, NormalizeAndRunningStats) {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    normalize_in_place(x);
    double m = 0.0, s = 0.0;
    for (double v : x) m += v;
    for (double v : x) s += v * v;
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(s / 4.0, 1.0, 1e-6);

    RunningMeanStd rms;
    rms.update({1.0, 2.0, 3.0});
    rms.update({4.0, 5.0});
    EXPECT_NEAR(rms.mean, 3.0, 1e-4);
    EXPECT_NEAR(rms.var, 2.0, 1e-3);
    EXPECT_NEAR(rms.denormalize(rms.normalize(7.5)), 7.5, 1e-12);
}

TEST(Adam, ZeroLearningRateLeavesParameters) {
    Vec p = Vec::LinSpaced(5, -1.0, 1.0);
    const Vec keep = p;
    Adam opt(5, 0.0);
    for (int k = 0; k < 10; ++k) opt.step(p, Vec::Ones(5));
    EXPECT_EQ(p, keep);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Vec p = Vec::Zero(3);
    Adam opt(3, 0.01);
    opt.step(p, (Vec(3) << 2.0, -0.5, 0.0).finished());
    EXPECT_NEAR(p[0], -0.01, 1e-9);
    EXPECT_NEAR(p[1], 0.01, 1e-9);
    EXPECT_EQ(p[2], 0.0);
    Vec g = (Vec(2) << 3.0, 4.0).finished();
    EXPECT_EQ(clip_grad_norm(g, 1.0), 5.0);
    EXPECT_NEAR(g.norm(), 1.0, 1e-15);
}

TEST(PhysicsAndConstraints, PropertySuites) {
    EXPECT_LE(checks::physics_max_rel_error(), 1e-12);
    EXPECT_TRUE(checks::specific_energy_monotone());
    const checks::ConstraintReport rep = checks::constraint_suite(20000, 19);
    EXPECT_LE(rep.max_abs_sum, 1e-9);
    EXPECT_EQ(rep.box_failures, 0);
    EXPECT_EQ(rep.limit_failures, 0);
}
