/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: tests/test_fitter.cpp
 *
 * Copyright 2026 The ect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ect/fitter.hpp"
#include "ect/synth.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace ect {
namespace {

/// A patch whose cells are given explicitly (values may be unnormalised).
PatchResponse make_patch(const std::vector<Eigen::Vector2d>& omega, const std::vector<double>& values)
{
    PatchResponse p;
    p.omega = omega;
    p.values = values;
    p.size = 0;
    return p;
}

/// r x r grid patch centred on c with the given per-cell response.
template <typename F>
PatchResponse grid_patch(const Eigen::Vector2d& c, int r, F f)
{
    PatchResponse p;
    p.size = r;
    const int half = r / 2;
    for (int dy = -half; dy <= half; ++dy)
    {
        for (int dx = -half; dx <= half; ++dx)
        {
            const Eigen::Vector2d y = c + Eigen::Vector2d(dx, dy);
            p.omega.push_back(y);
            p.values.push_back(f(y));
        }
    }
    return p;
}

/// Independent E-step: elementwise product of response and kernel, then normalise.
std::vector<double> posterior_oracle(const PatchResponse& p, const Eigen::Vector2d& x, double rho_i)
{
    std::vector<double> w(p.values.size());
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
    {
        const double kernel = std::exp(-(x - p.omega[k]).squaredNorm() / (2.0 * rho_i)) / (2.0 * std::numbers::pi * rho_i);
        w[k] = p.values[k] * kernel;
        total += w[k];
    }
    for (double& v : w)
    {
        v /= total;
    }
    return w;
}

/// Dense diagonal Lambda~^-1 (pseudo-inverse, zero on the similarity block).
Eigen::MatrixXd dense_prior(const PointDistributionModel& model)
{
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(model.num_params(), model.num_params());
    for (Eigen::Index j = 0; j < model.num_modes(); ++j)
    {
        inv(num_similarity_params + j, num_similarity_params + j) = 1.0 / model.eigenvalues()[j];
    }
    return inv;
}

/**
 * Weighted ridge regression min |W^1/2 (S p - t)|^2 + c p^T L p, solved as
 * one stacked least-squares problem with Householder QR. target_prior is the
 * point the prior pulls towards (0 for initialisation, -p for updates).
 */
Eigen::VectorXd stacked_lsq(const Eigen::MatrixXd& s, const Eigen::VectorXd& w2n, const Eigen::VectorXd& t,
                            const Eigen::MatrixXd& prior, double c, const Eigen::VectorXd& target_prior)
{
    const Eigen::Index rows = s.rows();
    const Eigen::Index cols = s.cols();
    Eigen::MatrixXd a(rows + cols, cols);
    Eigen::VectorXd b(rows + cols);
    const Eigen::VectorXd sw = w2n.cwiseSqrt();
    a.topRows(rows) = sw.asDiagonal() * s;
    b.head(rows) = sw.cwiseProduct(t);
    const Eigen::MatrixXd root = (c * prior).cwiseSqrt();
    a.bottomRows(cols) = root;
    b.tail(cols) = root * target_prior;
    return a.colPivHouseholderQr().solve(b);
}

Eigen::VectorXd repeat_pairs(const Eigen::VectorXd& per_landmark)
{
    Eigen::VectorXd out(2 * per_landmark.size());
    for (Eigen::Index i = 0; i < per_landmark.size(); ++i)
    {
        out[2 * i] = out[2 * i + 1] = per_landmark[i];
    }
    return out;
}

// confidence_weight ---------------------------------------------------------

TEST(ConfidenceWeight, ZeroPatchGivesFloor)
{
    FitConfig cfg;
    EXPECT_EQ(confidence_weight(grid_patch({5, 5}, 5, [](auto) { return 0.0; }), cfg), cfg.w_min);
}

TEST(ConfidenceWeight, SingleCellGivesCeiling)
{
    FitConfig cfg;
    cfg.b = -25.0;
    const auto p = grid_patch({5, 5}, 5, [](const Eigen::Vector2d& y) { return y == Eigen::Vector2d(6, 4) ? 2.0 : 0.0; });
    EXPECT_EQ(confidence_weight(p, cfg), cfg.w_max);
}

TEST(ConfidenceWeight, MonotoneInMassAtFixedDispersion)
{
    const auto gaussian = [](double scale) {
        return grid_patch({20, 20}, 15, [scale](const Eigen::Vector2d& y) {
            return scale * std::exp(-(y - Eigen::Vector2d(20.3, 19.6)).squaredNorm() / 72.0) / (72.0 * std::numbers::pi);
        });
    };
    FitConfig unsaturated;
    unsaturated.a = 1.0;
    unsaturated.b = 0.0;
    EXPECT_LT(confidence_weight(gaussian(0.1), unsaturated), confidence_weight(gaussian(1.0), unsaturated));
    // Under the default offset the sigmoid saturates; the order still cannot invert.
    FitConfig defaults;
    EXPECT_LE(confidence_weight(gaussian(0.1), defaults), confidence_weight(gaussian(1.0), defaults));
}

TEST(ConfidenceWeight, DirectFormula)
{
    Random rng(1);
    FitConfig cfg;
    cfg.a = 3.0;
    cfg.b = -1.0;
    for (int trial = 0; trial < 50; ++trial)
    {
        const auto p = grid_patch({0, 0}, 5, [&](auto) { return rng.uniform(0.0, 2.0); });
        double mass = 0.0;
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        for (std::size_t k = 0; k < p.values.size(); ++k)
        {
            mass += p.values[k];
            mean += p.values[k] * p.omega[k];
        }
        mean /= mass;
        double var = 0.0;
        for (std::size_t k = 0; k < p.values.size(); ++k)
        {
            var += p.values[k] / mass * (p.omega[k] - mean).squaredNorm();
        }
        const double expected = std::clamp(1.0 / (1.0 + std::exp(-(cfg.a * mass / var + cfg.b))), cfg.w_min, cfg.w_max);
        EXPECT_NEAR(confidence_weight(p, cfg), expected, 1e-12);
    }
}

// robust_initialize ---------------------------------------------------------

class SmallModel : public ::testing::Test
{
protected:
    PointDistributionModel model = test::small_model(10, 6);
    Random rng{42};
};

TEST_F(SmallModel, InitialiseInterpolatesInSpanShapeWithoutPrior)
{
    const PdmParams p0(test::random_vector(rng, model.num_params(), -0.2, 0.2));
    const auto p = robust_initialize(model, generate_shape(model, p0), Eigen::VectorXd::Ones(10), 0.0);
    EXPECT_LT((p.values - p0.values).cwiseAbs().maxCoeff(), 1e-8);
}

TEST_F(SmallModel, InitialiseAtMeanIsZero)
{
    const Eigen::VectorXd w = test::random_vector(rng, 10, 0.1, 1.0);
    const auto p = robust_initialize(model, model.mean_shape(), w, 25.0);
    EXPECT_LT(p.values.cwiseAbs().maxCoeff(), 1e-10);
}

TEST_F(SmallModel, InitialiseIgnoresZeroWeightOutlier)
{
    const PdmParams p0(test::random_vector(rng, model.num_params(), -0.2, 0.2));
    Eigen::VectorXd c = generate_shape(model, p0).coords();
    c[6] += 50.0;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(10);
    w[3] = 0.0;
    const double gamma = 0.01;
    const auto p = robust_initialize(model, Shape(c), w, gamma);
    const Eigen::VectorXd oracle = stacked_lsq(model.basis(), repeat_pairs(w), c - model.mean_shape().coords(),
                                               dense_prior(model), gamma, Eigen::VectorXd::Zero(model.num_params()));
    EXPECT_LT((p.values - oracle).cwiseAbs().maxCoeff(), 1e-8);
    // The displaced landmark has no influence at all.
    const auto clean = robust_initialize(model, generate_shape(model, p0), w, gamma);
    EXPECT_LT((p.values - clean.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_F(SmallModel, InitialiseMatchesDenseOracle)
{
    for (int trial = 0; trial < 100; ++trial)
    {
        const Shape coarse(model.mean_shape().coords() + test::random_vector(rng, 20, -0.3, 0.3));
        const Eigen::VectorXd w = test::random_vector(rng, 10, 0.0, 1.0);
        const double gamma = rng.uniform(0.0, 1e-3);
        const double scale = rng.uniform(0.5, 2.0);
        const auto p = robust_initialize(model, coarse, w, gamma, scale);
        const Eigen::VectorXd oracle = stacked_lsq(model.basis(), repeat_pairs(w),
                                                   coarse.coords() - model.mean_shape().coords(), dense_prior(model),
                                                   gamma / scale, Eigen::VectorXd::Zero(model.num_params()));
        EXPECT_LT((p.values - oracle).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST_F(SmallModel, InitialiseNeedsThreeWeightedLandmarks)
{
    Eigen::VectorXd w = Eigen::VectorXd::Zero(10);
    w[0] = w[1] = 1.0;
    try
    {
        robust_initialize(model, model.mean_shape(), w, 25.0);
        FAIL() << "expected an error";
    } catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::InitDegenerate);
    }
    EXPECT_THROW(robust_initialize(model, model.mean_shape(), Eigen::VectorXd::Ones(9), 25.0), Error);
}

// update_params -------------------------------------------------------------

TEST_F(SmallModel, UpdateIsStationaryAtZero)
{
    const auto p = update_params(model, PdmParams::zero(model.num_params()), Eigen::VectorXd::Zero(20),
                                 Eigen::VectorXd::Ones(10), 5.0);
    EXPECT_LT(p.values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST_F(SmallModel, UnregularisedUpdateIsOrthonormalProjection)
{
    const PdmParams p(test::random_vector(rng, model.num_params(), -0.1, 0.1));
    const Eigen::VectorXd v = test::random_vector(rng, 20, -0.05, 0.05);
    const auto next = update_params(model, p, v, Eigen::VectorXd::Ones(10), 0.0);
    EXPECT_LT((next.values - p.values - model.basis().transpose() * v).cwiseAbs().maxCoeff(), 1e-9);
    // Same as projecting the displaced shape.
    const Shape displaced(generate_shape(model, p).coords() + v);
    EXPECT_LT((next.values - project_shape(model, displaced).values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(SmallModel, UpdateMatchesDenseOracle)
{
    for (int trial = 0; trial < 100; ++trial)
    {
        const PdmParams p(test::random_vector(rng, model.num_params(), -0.1, 0.1));
        const Eigen::VectorXd v = test::random_vector(rng, 20, -0.05, 0.05);
        const Eigen::VectorXd w = test::random_vector(rng, 10, 0.0, 1.0);
        const double rho = rng.uniform(0.0, 0.05);
        const double scale = rng.uniform(0.5, 2.0);
        const auto next = update_params(model, p, v, w, rho, scale);
        const Eigen::VectorXd dp =
            stacked_lsq(model.basis(), repeat_pairs(w), v, dense_prior(model), rho * rho / scale, -p.values);
        EXPECT_LT((next.values - p.values - dp).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST_F(SmallModel, UpdateIsJointlyScaleInvariant)
{
    for (int trial = 0; trial < 20; ++trial)
    {
        const PdmParams p(test::random_vector(rng, model.num_params(), -0.1, 0.1));
        const Eigen::VectorXd v = test::random_vector(rng, 20, -0.05, 0.05);
        const double c = rng.uniform(0.1, 10.0);
        const double rho = 0.02;
        const auto a = update_params(model, p, v, Eigen::VectorXd::Ones(10), rho);
        const auto b = update_params(model, p, v, Eigen::VectorXd::Constant(10, c), rho * std::sqrt(c));
        EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-9);
    }
}

// E-step and mean shift -----------------------------------------------------

TEST(EStep, UniformPatchGivesNormalisedKernel)
{
    const Eigen::Vector2d c(10, 10);
    const auto p = grid_patch(c, 7, [](auto) { return 0.3; });
    const double rho_i = 4.0;
    const auto post = estep_posterior(p, c, rho_i);
    double total = 0.0;
    std::vector<double> kernel;
    for (const auto& y : p.omega)
    {
        kernel.push_back(std::exp(-(y - c).squaredNorm() / (2.0 * rho_i)));
        total += kernel.back();
    }
    for (std::size_t k = 0; k < kernel.size(); ++k)
    {
        EXPECT_NEAR(post.weights[k], kernel[k] / total, 1e-15);
    }
}

TEST(EStep, SingleCandidateTakesAllMass)
{
    const auto p = grid_patch({3, 3}, 3, [](const Eigen::Vector2d& y) { return y == Eigen::Vector2d(4, 2) ? 0.5 : 0.0; });
    const auto post = estep_posterior(p, {3.0, 3.0}, 1.0);
    EXPECT_EQ(post.weights[2], 1.0);
}

TEST(EStep, RandomizedPropertiesAndOracle)
{
    Random rng(7);
    for (int trial = 0; trial < 2000; ++trial)
    {
        const int r = 3 + 2 * static_cast<int>(rng.index(5));
        const Eigen::Vector2d c(rng.uniform(0, 50), rng.uniform(0, 50));
        const auto p = grid_patch(c, r, [&](auto) { return rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 1.0); });
        if (!(p.mass() > 0.0))
        {
            continue;
        }
        const Eigen::Vector2d x = c + Eigen::Vector2d(rng.uniform(-3, 3), rng.uniform(-3, 3));
        const double rho_i = rng.uniform(0.5, 50.0);
        const auto post = estep_posterior(p, x, rho_i);
        const auto oracle = posterior_oracle(p, x, rho_i);
        double total = 0.0;
        for (std::size_t k = 0; k < oracle.size(); ++k)
        {
            EXPECT_NEAR(post.weights[k], oracle[k], 1e-12);
            total += post.weights[k];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(EStep, TinyBandwidthDoesNotUnderflow)
{
    const auto p = grid_patch({0, 0}, 9, [](auto) { return 1.0; });
    const auto post = estep_posterior(p, {40.0, 40.0}, 1e-4);
    EXPECT_FALSE(post.fallback);
    EXPECT_NEAR(post.weights.back(), 1.0, 1e-12); // the corner nearest to x
}

TEST(MeanShift, CentredGaussianIsAFixedPoint)
{
    const Eigen::Vector2d x(30, 30);
    const auto p = grid_patch(x, 31, [&](const Eigen::Vector2d& y) { return std::exp(-(y - x).squaredNorm() / 72.0); });
    EXPECT_LT(mean_shift_vector(p, x, 25.0).vector.norm(), 0.05);
}

TEST(MeanShift, SingleCandidateGivesExactOffset)
{
    const Eigen::Vector2d x(10, 10);
    const auto p = make_patch({{13, 14}, {0, 0}}, {1.0, 0.0});
    const auto v = mean_shift_vector(p, x, 25.0).vector;
    EXPECT_EQ(v, Eigen::Vector2d(3, 4));
}

TEST(MeanShift, LargeBandwidthApproachesResponseCentroid)
{
    const Eigen::Vector2d x(20, 20);
    const auto p = grid_patch(x, 15, [&](const Eigen::Vector2d& y) {
        return std::exp(-(y - x - Eigen::Vector2d(5, 0)).squaredNorm() / 18.0);
    });
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < p.values.size(); ++k)
    {
        centroid += p.values[k] * p.omega[k];
    }
    centroid /= p.mass();
    const auto v = mean_shift_vector(p, x, 1e14).vector;
    EXPECT_LT((v - (centroid - x)).norm(), 1e-10);
}

TEST(MeanShift, ConvexHullAndFixedPointOverManyCases)
{
    Random rng(8);
    for (int trial = 0; trial < 10000; ++trial)
    {
        const Eigen::Vector2d c(rng.uniform(0, 100), rng.uniform(0, 100));
        const int r = 3 + 2 * static_cast<int>(rng.index(4));
        const auto p = grid_patch(c, r, [&](auto) { return rng.uniform(0.0, 1.0); });
        const Eigen::Vector2d x = c + Eigen::Vector2d(rng.uniform(-5, 5), rng.uniform(-5, 5));
        const double rho_i = rng.uniform(0.1, 100.0);
        const auto post = estep_posterior(p, x, rho_i);
        double total = 0.0;
        for (const double w : post.weights)
        {
            total += w;
        }
        ASSERT_NEAR(total, 1.0, 1e-12);
        // The grid window is its own convex hull: an axis-aligned box.
        const Eigen::Vector2d v = mean_shift_vector(p, x, rho_i).vector;
        const Eigen::Vector2d y = x + v;
        const double half = r / 2;
        ASSERT_GE(y.x(), c.x() - half - 1e-9);
        ASSERT_LE(y.x(), c.x() + half + 1e-9);
        ASSERT_GE(y.y(), c.y() - half - 1e-9);
        ASSERT_LE(y.y(), c.y() + half + 1e-9);
        // Single candidate: the shift is exactly the offset to it.
        const Eigen::Vector2d target(std::round(rng.uniform(0, 100)), std::round(rng.uniform(0, 100)));
        const auto one = make_patch({target}, {rng.uniform(0.1, 1.0)});
        ASSERT_EQ(mean_shift_vector(one, x, rho_i).vector, Eigen::Vector2d(target - x));
    }
}

TEST(MeanShift, EmptyPatchReportsZeroEvidence)
{
    const auto p = grid_patch({3, 3}, 3, [](auto) { return 0.0; });
    const auto ms = mean_shift_vector(p, {3.0, 3.0}, 25.0);
    EXPECT_TRUE(ms.zero_evidence);
    EXPECT_EQ(ms.vector, Eigen::Vector2d::Zero());
}

// Q surrogate ---------------------------------------------------------------

class Surrogate : public SmallModel
{
protected:
    /// One single-candidate patch per landmark at the given positions.
    std::vector<PatchResponse> single_candidates(const Shape& at) const
    {
        std::vector<PatchResponse> patches;
        for (std::size_t i = 0; i < at.size(); ++i)
        {
            patches.push_back(make_patch({at.point(i)}, {1.0}));
        }
        return patches;
    }
};

TEST_F(Surrogate, ZeroAtCandidates)
{
    const auto patches = single_candidates(model.mean_shape());
    EXPECT_EQ(evaluate_q_surrogate(model, PdmParams::zero(model.num_params()), patches, model.mean_shape(),
                                   Eigen::VectorXd::Ones(10), 5.0),
              0.0);
}

TEST_F(Surrogate, QuadraticInOneDisplacement)
{
    Eigen::VectorXd c = model.mean_shape().coords();
    c[4] += 0.3;
    c[5] -= 0.4;
    const auto patches = single_candidates(Shape(c));
    Eigen::VectorXd w = Eigen::VectorXd::Ones(10);
    w[2] = 0.7;
    const double rho = 5.0;
    const double q = evaluate_q_surrogate(model, PdmParams::zero(model.num_params()), patches, model.mean_shape(), w, rho);
    EXPECT_NEAR(q, 0.7 * 0.25 / (rho * rho), 1e-15);
}

TEST_F(Surrogate, MatchesDirectDoubleSum)
{
    for (int trial = 0; trial < 50; ++trial)
    {
        const PdmParams p(test::random_vector(rng, model.num_params(), -0.1, 0.1));
        const Shape centres(model.mean_shape().coords() + test::random_vector(rng, 20, -0.1, 0.1));
        std::vector<PatchResponse> patches;
        for (std::size_t i = 0; i < 10; ++i)
        {
            patches.push_back(grid_patch(centres.point(i), 5, [&](auto) { return rng.uniform(0.0, 1.0); }));
            for (auto& y : patches.back().omega)
            {
                y = centres.point(i) + 0.02 * (y - centres.point(i));
            }
        }
        const Eigen::VectorXd w = test::random_vector(rng, 10, 0.1, 1.0);
        const double rho = 0.05;
        const Shape x = generate_shape(model, p);
        double oracle = p.values.transpose() * dense_prior(model) * p.values;
        for (std::size_t i = 0; i < 10; ++i)
        {
            const auto post = posterior_oracle(patches[i], centres.point(i), rho * rho / w[static_cast<Eigen::Index>(i)]);
            for (std::size_t k = 0; k < post.size(); ++k)
            {
                oracle += w[static_cast<Eigen::Index>(i)] * post[k] * (x.point(i) - patches[i].omega[k]).squaredNorm() /
                          (rho * rho);
            }
        }
        EXPECT_NEAR(evaluate_q_surrogate(model, p, patches, centres, w, rho), oracle, 1e-10 * std::max(1.0, oracle));
    }
}

TEST_F(Surrogate, MStepDoesNotIncreaseItOnQuadraticInstances)
{
    for (int trial = 0; trial < 100; ++trial)
    {
        const PdmParams p(test::random_vector(rng, model.num_params(), -0.1, 0.1));
        const Shape current = generate_shape(model, p);
        const Shape targets(current.coords() + test::random_vector(rng, 20, -0.05, 0.05));
        const auto patches = single_candidates(targets);
        const Eigen::VectorXd w = test::random_vector(rng, 10, 0.1, 1.0);
        const double rho = 0.03;
        Eigen::VectorXd v(20);
        for (std::size_t i = 0; i < 10; ++i)
        {
            const double rho_i = rho * rho / w[static_cast<Eigen::Index>(i)];
            v.segment<2>(2 * static_cast<Eigen::Index>(i)) = mean_shift_vector(patches[i], current.point(i), rho_i).vector;
        }
        const auto next = update_params(model, p, v, w, rho);
        const double before = evaluate_q_surrogate(model, p, patches, current, w, rho);
        const double after = evaluate_q_surrogate(model, next, patches, current, w, rho);
        EXPECT_LE(after, before + 1e-9);
    }
}

// fit -----------------------------------------------------------------------

Scenario face_scenario(std::uint64_t seed, double noise = 0.0, double occluded = 0.0)
{
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.noise_amplitude = noise;
    cfg.occluded_fraction = occluded;
    return sample_scenario(test::face_model(), cfg);
}

TEST(Fit, AllZeroStackGivesCentredMeanWithEveryFlag)
{
    const auto& model = test::face_model();
    std::vector<ResponseMap> maps(68, ResponseMap(256, 256));
    const auto result = fit(model, ResponseStack(std::move(maps)), FitConfig{});
    EXPECT_LT((centroid(result.shape) - Eigen::Vector2d(128, 128)).norm(), 1e-9);
    const auto pose = optimal_similarity(model.mean_shape(), result.shape);
    EXPECT_NEAR(pose.scale(), model.reference_scale(), 1e-6 * model.reference_scale());
    EXPECT_NEAR(mean_landmark_error(result.shape, apply_similarity(pose, model.mean_shape())), 0.0, 1e-9);
    EXPECT_TRUE(std::all_of(result.occluded.begin(), result.occluded.end(), [](bool b) { return b; }));
}

TEST(Fit, RejectsStackOfWrongSize)
{
    std::vector<ResponseMap> maps(29, ResponseMap(32, 32));
    try
    {
        fit(test::face_model(), ResponseStack(std::move(maps)), FitConfig{});
        FAIL() << "expected an error";
    } catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(Fit, IsDeterministic)
{
    const auto s = face_scenario(11, 0.3, 0.2);
    const auto a = fit(test::face_model(), s.stack, FitConfig{});
    const auto b = fit(test::face_model(), s.stack, FitConfig{});
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k)
    {
        EXPECT_EQ(a.trace[k].shape, b.trace[k].shape);
        EXPECT_EQ(a.trace[k].surrogate, b.trace[k].surrogate);
    }
    EXPECT_EQ(a.weights, b.weights);
}

TEST(Fit, TraceFollowsPatchSchedule)
{
    const auto s = face_scenario(12);
    FitConfig cfg;
    const auto result = fit(test::face_model(), s.stack, cfg);
    ASSERT_GE(result.trace.size(), 1u);
    ASSERT_LE(result.trace.size(), 5u);
    for (std::size_t k = 0; k < result.trace.size(); ++k)
    {
        EXPECT_EQ(result.trace[k].patch_size, cfg.patch_sizes[k]);
    }
    EXPECT_EQ(result.trace.back().shape, result.shape);
}

TEST(Fit, ZeroedMapsGetFloorWeight)
{
    const auto s = face_scenario(13, 0.0, 0.2);
    FitConfig cfg;
    const auto result = fit(test::face_model(), s.stack, cfg);
    for (std::size_t i = 0; i < 68; ++i)
    {
        if (s.occluded[i])
        {
            EXPECT_LE(result.weights[i], cfg.w_min + 0.05);
            EXPECT_TRUE(result.occluded[i]);
            EXPECT_TRUE(result.zero_evidence[i]);
        }
    }
}

TEST(Fit, WeightedBeatsUniformOnOccludedLandmarksInMostTrials)
{
    int wins = 0;
    const int trials = 20;
    FitConfig uniform;
    uniform.uniform_weights = true;
    for (int t = 0; t < trials; ++t)
    {
        const auto s = face_scenario(100 + static_cast<std::uint64_t>(t), 0.0, 0.2);
        std::vector<bool> mask = s.occluded;
        const double weighted = mean_landmark_error(fit(test::face_model(), s.stack, FitConfig{}).shape, s.truth);
        const double plain = mean_landmark_error(fit(test::face_model(), s.stack, uniform).shape, s.truth);
        wins += weighted < plain;
    }
    EXPECT_GT(wins, trials / 2);
}

TEST(Fit, FlatPriorRecoversNoiselessTruthToSubpixel)
{
    // Same bases with eigenvalues inflated 1e6x: the tuning mechanics alone, without prior shrinkage.
    const auto& face = test::face_model();
    const PointDistributionModel flat(face.mean_shape(), face.similarity_bases(), face.components(),
                                      face.eigenvalues() * 1e6, face.reference_scale(), face.retained_variance());
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto s = face_scenario(200 + seed);
        EXPECT_LT(mean_landmark_error(fit(flat, s.stack, FitConfig{}).shape, s.truth), 0.5) << "seed " << 200 + seed;
    }
}

TEST(Fit, ConfigValidation)
{
    FitConfig cfg;
    cfg.patch_sizes = {31, 25, 19, 13};
    EXPECT_THROW(cfg.validate(), Error);
    cfg = FitConfig{};
    cfg.patch_sizes = {31, 25, 20, 13, 9};
    EXPECT_THROW(cfg.validate(), Error);
    cfg = FitConfig{};
    cfg.w_min = 0.9;
    cfg.w_max = 0.5;
    EXPECT_THROW(cfg.validate(), Error);
    EXPECT_NO_THROW(FitConfig{}.validate());
}

} // namespace
} // namespace ect
