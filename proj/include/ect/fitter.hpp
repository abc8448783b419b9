/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/fitter.hpp
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
#pragma once

#ifndef ECT_FITTER_HPP
#define ECT_FITTER_HPP

#include "ect/error.hpp"
#include "ect/pdm.hpp"
#include "ect/response.hpp"
#include "ect/shape.hpp"

#include "Eigen/Cholesky"
#include "Eigen/Core"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace ect {

/**
 * Settings of the three fitting stages. Defaults: five tuning iterations
 * over shrinking patches, rho = 5 px and gamma = rho^2.
 */
struct FitConfig
{
    int max_iterations = 5;
    std::vector<int> patch_sizes{31, 25, 19, 13, 9};
    double rho = 5.0;           ///< kernel bandwidth, pixels
    double gamma = 25.0;        ///< prior weight of the correction step
    double a = 0.25;            ///< confidence sigmoid slope
    double b = 25.0;            ///< confidence sigmoid offset
    double w_min = 1e-3;
    double w_max = 1.0 - 1e-6;
    double converge_tol = 0.05; ///< mean landmark move (px) below which tuning stops
    double occlusion_threshold = 0.5;
    /// Forces every confidence to 1 in both correction and tuning (plain RLMS).
    bool uniform_weights = false;

    void validate() const
    {
        using detail::require;
        require(max_iterations >= 1, ErrorKind::InvalidArgument, "max_iterations must be >= 1");
        require(patch_sizes.size() == static_cast<std::size_t>(max_iterations), ErrorKind::InvalidArgument,
                "one patch size per tuning iteration is required");
        for (std::size_t k = 0; k < patch_sizes.size(); ++k)
        {
            require(patch_sizes[k] >= 3 && patch_sizes[k] % 2 == 1, ErrorKind::InvalidArgument,
                    "patch sizes must be odd and >= 3");
            require(k == 0 || patch_sizes[k] <= patch_sizes[k - 1], ErrorKind::InvalidArgument,
                    "patch sizes must be non-increasing");
        }
        require(std::isfinite(rho) && rho > 0.0, ErrorKind::InvalidArgument, "rho must be positive");
        require(std::isfinite(gamma) && gamma >= 0.0, ErrorKind::InvalidArgument, "gamma must be >= 0");
        require(std::isfinite(a) && std::isfinite(b), ErrorKind::InvalidArgument, "a and b must be finite");
        require(0.0 <= w_min && w_min < w_max && w_max <= 1.0, ErrorKind::InvalidArgument,
                "confidence clamps must satisfy 0 <= w_min < w_max <= 1");
        require(std::isfinite(converge_tol) && converge_tol >= 0.0, ErrorKind::InvalidArgument,
                "converge_tol must be >= 0");
        require(occlusion_threshold >= 0.0 && occlusion_threshold <= 1.0, ErrorKind::InvalidArgument,
                "occlusion_threshold must lie in [0, 1]");
    }
};

namespace detail {

inline double sigmoid(double z)
{
    if (z >= 0.0)
    {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline Eigen::VectorXd expand_weights(const Eigen::VectorXd& per_landmark)
{
    Eigen::VectorXd w(2 * per_landmark.size());
    for (Eigen::Index i = 0; i < per_landmark.size(); ++i)
    {
        w[2 * i] = per_landmark[i];
        w[2 * i + 1] = per_landmark[i];
    }
    return w;
}

/// Solves the symmetric positive definite system, or reports failure.
inline bool solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs, Eigen::VectorXd& out)
{
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
    {
        return false;
    }
    out = llt.solve(rhs);
    return out.allFinite();
}

} /* namespace detail */

/**
 * Confidence of one landmark from its raw (unnormalised) patch:
 * sigmoid(a * mass / dispersion + b), clamped to [w_min, w_max].
 *
 * dispersion is the trace of the covariance of the patch coordinates under
 * the normalised response. An empty patch has no evidence (w_min); a patch
 * whose mass sits on one cell is perfectly concentrated (w_max).
 */
inline double confidence_weight(const PatchResponse& patch, const FitConfig& cfg)
{
    const double mass = patch.mass();
    if (!(mass > 0.0))
    {
        return cfg.w_min;
    }
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < patch.values.size(); ++k)
    {
        mean += (patch.values[k] / mass) * patch.omega[k];
    }
    double dispersion = 0.0;
    for (std::size_t k = 0; k < patch.values.size(); ++k)
    {
        if (patch.values[k] > 0.0)
        {
            dispersion += (patch.values[k] / mass) * (patch.omega[k] - mean).squaredNorm();
        }
    }
    if (!(dispersion > 0.0))
    {
        return cfg.w_max;
    }
    return std::clamp(detail::sigmoid(cfg.a * mass / dispersion + cfg.b), cfg.w_min, cfg.w_max);
}

/**
 * Correction step: weighted, prior-regularised projection of a coarse shape,
 *
 *     p0 = (gamma * Lambda~^-1 + S^T W S)^-1 S^T W (coarse - mean).
 *
 * weights holds one entry per landmark (W repeats it for x and y).
 * prior_scale multiplies every eigenvalue; with the default of 1 the prior
 * is the model's own.
 */
inline PdmParams robust_initialize(const PointDistributionModel& model, const Shape& coarse,
                                   const Eigen::VectorXd& weights, double gamma, double prior_scale = 1.0)
{
    detail::require(coarse.size() == model.num_landmarks(), ErrorKind::DimensionMismatch,
                    "robust_initialize: landmark count does not match the model");
    detail::require(weights.size() == static_cast<Eigen::Index>(model.num_landmarks()),
                    ErrorKind::DimensionMismatch, "robust_initialize: one weight per landmark required");
    detail::require(weights.allFinite() && (weights.array() >= 0.0).all(), ErrorKind::InvalidArgument,
                    "robust_initialize: weights must be finite and non-negative");
    detail::require(gamma >= 0.0 && prior_scale > 0.0, ErrorKind::InvalidArgument,
                    "robust_initialize: gamma must be >= 0 and prior_scale > 0");
    if ((weights.array() > 0.0).count() < 3)
    {
        detail::fail(ErrorKind::InitDegenerate, "robust_initialize: fewer than 3 landmarks carry weight");
    }
    const Eigen::MatrixXd& s = model.basis();
    const Eigen::VectorXd w = detail::expand_weights(weights);
    Eigen::MatrixXd normal = s.transpose() * w.asDiagonal() * s;
    normal.diagonal() += (gamma / prior_scale) * model.prior_precision();
    const Eigen::VectorXd rhs = s.transpose() * w.asDiagonal() * (coarse.coords() - model.mean_shape().coords());
    Eigen::VectorXd p;
    if (!detail::solve_spd(normal, rhs, p))
    {
        detail::fail(ErrorKind::InitDegenerate, "robust_initialize: normal equations are singular");
    }
    return PdmParams(std::move(p));
}

struct Posterior
{
    std::vector<double> weights; ///< one per patch cell, sums to 1
    bool fallback = false;       ///< kernel terms were unusable; weights are the response alone
};

/**
 * E-step: posterior over the patch candidates,
 * w_y proportional to pi_y * N(x; y, rho_i I), evaluated in the log domain.
 */
inline Posterior estep_posterior(const PatchResponse& patch, const Eigen::Vector2d& x, double rho_i)
{
    detail::require(std::isfinite(rho_i) && rho_i > 0.0, ErrorKind::InvalidArgument, "rho_i must be positive");
    detail::require(x.allFinite(), ErrorKind::InvalidArgument, "current position must be finite");
    const std::size_t cells = patch.values.size();
    Posterior post;
    post.weights.assign(cells, 0.0);
    const double mass = patch.mass();
    if (!(mass > 0.0))
    {
        detail::fail(ErrorKind::ZeroEvidence, "estep_posterior: patch carries no response mass");
    }
    std::vector<double> logs(cells, -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    const double inv_two_rho = 0.5 / rho_i;
    for (std::size_t k = 0; k < cells; ++k)
    {
        if (patch.values[k] > 0.0)
        {
            logs[k] = std::log(patch.values[k]) - (x - patch.omega[k]).squaredNorm() * inv_two_rho;
            top = std::max(top, logs[k]);
        }
    }
    double total = 0.0;
    if (std::isfinite(top))
    {
        for (std::size_t k = 0; k < cells; ++k)
        {
            if (patch.values[k] > 0.0)
            {
                post.weights[k] = std::exp(logs[k] - top);
                total += post.weights[k];
            }
        }
    }
    if (!(total > 0.0) || !std::isfinite(total))
    {
        post.fallback = true;
        for (std::size_t k = 0; k < cells; ++k)
        {
            post.weights[k] = patch.values[k] / mass;
        }
        return post;
    }
    for (double& w : post.weights)
    {
        w /= total;
    }
    return post;
}

struct MeanShift
{
    Eigen::Vector2d vector = Eigen::Vector2d::Zero();
    bool zero_evidence = false;
};

/// Posterior-mean displacement sum_y w_y y - x; zero when the patch is empty.
inline MeanShift mean_shift_vector(const PatchResponse& patch, const Eigen::Vector2d& x, double rho_i)
{
    if (!(patch.mass() > 0.0))
    {
        return {Eigen::Vector2d::Zero(), true};
    }
    const Posterior post = estep_posterior(patch, x, rho_i);
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < post.weights.size(); ++k)
    {
        mean += post.weights[k] * patch.omega[k];
    }
    return {mean - x, false};
}

/**
 * Regularised Gauss-Newton step with the constant Jacobian J = S:
 *
 *     dp = (rho^2 Lambda~^-1 + S^T W S)^-1 (S^T W v - rho^2 Lambda~^-1 p)
 *
 * and returns p + dp. v stacks the mean-shift vectors (2n); weights has one
 * entry per landmark. prior_scale multiplies every eigenvalue.
 */
inline PdmParams update_params(const PointDistributionModel& model, const PdmParams& params,
                               const Eigen::VectorXd& v, const Eigen::VectorXd& weights, double rho,
                               double prior_scale = 1.0)
{
    const Eigen::Index dim = model.mean_shape().coords().size();
    detail::require(params.size() == model.num_params(), ErrorKind::DimensionMismatch,
                    "update_params: parameter length does not match the model");
    detail::require(v.size() == dim, ErrorKind::DimensionMismatch, "update_params: v must have 2n entries");
    detail::require(weights.size() == dim / 2, ErrorKind::DimensionMismatch,
                    "update_params: one weight per landmark required");
    detail::require(v.allFinite(), ErrorKind::InvalidArgument, "update_params: mean-shift vectors must be finite");
    detail::require(weights.allFinite() && (weights.array() >= 0.0).all(), ErrorKind::InvalidArgument,
                    "update_params: weights must be finite and non-negative");
    detail::require(std::isfinite(rho) && rho >= 0.0 && prior_scale > 0.0, ErrorKind::InvalidArgument,
                    "update_params: rho must be >= 0 and prior_scale > 0");
    const Eigen::MatrixXd& s = model.basis();
    const Eigen::VectorXd w = detail::expand_weights(weights);
    const Eigen::VectorXd precision = (rho * rho / prior_scale) * model.prior_precision();
    Eigen::MatrixXd normal = s.transpose() * w.asDiagonal() * s;
    normal.diagonal() += precision;
    const Eigen::VectorXd rhs = s.transpose() * w.asDiagonal() * v - precision.cwiseProduct(params.values);
    Eigen::VectorXd dp;
    if (!detail::solve_spd(normal, rhs, dp))
    {
        detail::fail(ErrorKind::InitDegenerate, "update_params: normal equations are singular");
    }
    return PdmParams(params.values + dp);
}

/**
 * Surrogate objective minimised by update_params, with the E-step frozen at
 * estep_centers:
 *
 *     |q|^2_{Lambda^-1} + sum_i w_i sum_y (w_y / rho^2) |x_i - y|^2
 *
 * where x = mean + S p. Patches without mass contribute nothing.
 */
inline double evaluate_q_surrogate(const PointDistributionModel& model, const PdmParams& params,
                                   const std::vector<PatchResponse>& patches, const Shape& estep_centers,
                                   const Eigen::VectorXd& weights, double rho, double prior_scale = 1.0)
{
    const std::size_t n = model.num_landmarks();
    detail::require(patches.size() == n && estep_centers.size() == n &&
                        weights.size() == static_cast<Eigen::Index>(n),
                    ErrorKind::DimensionMismatch, "evaluate_q_surrogate: one patch, centre and weight per landmark");
    detail::require(rho > 0.0 && prior_scale > 0.0, ErrorKind::InvalidArgument,
                    "evaluate_q_surrogate: rho and prior_scale must be positive");
    const Shape x = generate_shape(model, params);
    double total = prior_penalty(model, params) / prior_scale;
    const double rho2 = rho * rho;
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto& patch = patches[i];
        const double wi = weights[static_cast<Eigen::Index>(i)];
        if (!(patch.mass() > 0.0) || !(wi > 0.0))
        {
            continue;
        }
        const Posterior post = estep_posterior(patch, estep_centers.point(i), rho2 / wi);
        const Eigen::Vector2d xi = x.point(i);
        double inner = 0.0;
        for (std::size_t k = 0; k < post.weights.size(); ++k)
        {
            inner += post.weights[k] * (xi - patch.omega[k]).squaredNorm();
        }
        total += wi * inner / rho2;
    }
    return total;
}

/// One tuning iteration as recorded in the fit trace.
struct FitIteration
{
    int patch_size = 0;
    Shape shape;
    double step_norm = 0.0;    ///< |dp|
    double shape_change = 0.0; ///< mean landmark move, px
    double surrogate = 0.0;    ///< surrogate after the step, E-step frozen at the pre-step shape
};

struct FitResult
{
    Shape shape;
    PdmParams params;
    std::vector<double> weights;
    std::vector<bool> occluded;
    std::vector<FitIteration> trace;
    /// Peak positions of the estimation step.
    Shape coarse;
    /// Correction-step shape.
    Shape initial;
    std::vector<bool> zero_evidence;
};

struct CoarseEstimate
{
    Shape shape;
    std::vector<bool> zero_evidence;
};

/// Estimation step: one landmark per response-map peak.
inline CoarseEstimate estimate_coarse_shape(const ResponseStack& stack)
{
    std::vector<Eigen::Vector2d> points;
    std::vector<bool> zero(stack.size(), false);
    points.reserve(stack.size());
    for (std::size_t i = 0; i < stack.size(); ++i)
    {
        const Peak peak = peak_location(stack.map(i));
        points.emplace_back(peak.location.x, peak.location.y);
        zero[i] = peak.zero_evidence;
    }
    return {Shape::from_points(points), std::move(zero)};
}

/// Scale of the pose encoded by p, relative to the canonical mean.
inline double pose_scale(const PointDistributionModel& model, const PdmParams& params)
{
    const Shape rigid(model.mean_shape().coords() + model.similarity_bases() * params.similarity());
    const double base = centered_coords(model.mean_shape()).norm();
    return centered_coords(rigid).norm() / base;
}

namespace detail {

/// Weighted fit of the similarity coefficients alone; the pose scale used to size the prior.
inline double weighted_pose_scale(const PointDistributionModel& model, const Shape& shape,
                                  const Eigen::VectorXd& weights)
{
    const Eigen::MatrixXd& sim = model.similarity_bases();
    const Eigen::VectorXd w = expand_weights(weights);
    const Eigen::MatrixXd normal = sim.transpose() * w.asDiagonal() * sim;
    const Eigen::VectorXd rhs = sim.transpose() * w.asDiagonal() * (shape.coords() - model.mean_shape().coords());
    Eigen::VectorXd p_sim;
    if (!solve_spd(normal, rhs, p_sim))
    {
        return model.reference_scale();
    }
    PdmParams p = PdmParams::zero(model.num_params());
    p.values.head(num_similarity_params) = p_sim;
    const double scale = pose_scale(model, p);
    return scale > 0.0 ? scale : model.reference_scale();
}

} /* namespace detail */

/**
 * Estimation-Correction-Tuning fit of a PDM to a response stack.
 *
 * Estimation takes the peak of each map. Correction runs robust_initialize
 * with confidences measured on patches (first patch size) at the peaks.
 * Tuning then alternates confidences, mean-shift vectors and regularised
 * updates over the patch schedule, stopping early once the mean landmark
 * move drops below converge_tol.
 *
 * The model's eigenvalues are variances in the canonical frame, whereas the
 * fit runs in pixels; the prior is therefore scaled by the squared pose scale
 * (taken from a weighted similarity fit during correction and from the
 * current parameters during tuning).
 */
inline FitResult fit(const PointDistributionModel& model, const ResponseStack& stack, const FitConfig& cfg)
{
    cfg.validate();
    const std::size_t n = model.num_landmarks();
    if (stack.size() != n)
    {
        detail::fail(ErrorKind::DimensionMismatch, "fit: stack has " + std::to_string(stack.size()) +
                                                       " maps but the model has " + std::to_string(n) +
                                                       " landmarks");
    }
    const auto ni = static_cast<Eigen::Index>(n);
    CoarseEstimate coarse = estimate_coarse_shape(stack);
    const double rho2 = cfg.rho * cfg.rho;

    if (std::all_of(coarse.zero_evidence.begin(), coarse.zero_evidence.end(), [](bool z) { return z; }))
    {
        const Eigen::Vector2d centre(stack.width() / 2, stack.height() / 2);
        PdmParams p = PdmParams::zero(model.num_params());
        p.values.head(num_similarity_params) =
            similarity_params(model, SimilarityTransform(model.reference_scale(), 0.0, centre));
        Shape shape = generate_shape(model, p);
        return FitResult{shape,
                         p,
                         std::vector<double>(n, cfg.w_min),
                         std::vector<bool>(n, true),
                         {},
                         coarse.shape,
                         shape,
                         coarse.zero_evidence};
    }

    const auto weigh = [&](const PatchResponse& patch) {
        return cfg.uniform_weights ? 1.0 : confidence_weight(patch, cfg);
    };

    Eigen::VectorXd weights(ni);
    for (std::size_t i = 0; i < n; ++i)
    {
        weights[static_cast<Eigen::Index>(i)] =
            weigh(extract_patch(stack, i, coarse.shape.point(i), cfg.patch_sizes.front()));
    }
    const double init_scale = detail::weighted_pose_scale(model, coarse.shape, weights);
    PdmParams params = robust_initialize(model, coarse.shape, weights, cfg.gamma, init_scale * init_scale);
    Shape current = generate_shape(model, params);
    const Shape initial = current;

    std::vector<FitIteration> trace;
    std::vector<PatchResponse> patches(n);
    Eigen::VectorXd v(2 * ni);
    int last_size = cfg.patch_sizes.front();
    for (int k = 0; k < cfg.max_iterations; ++k)
    {
        const int r = cfg.patch_sizes[static_cast<std::size_t>(k)];
        last_size = r;
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto ii = static_cast<Eigen::Index>(i);
            patches[i] = extract_patch(stack, i, current.point(i), r);
            weights[ii] = weigh(patches[i]);
            v.segment<2>(2 * ii) = mean_shift_vector(patches[i], current.point(i), rho2 / weights[ii]).vector;
        }
        const double scale = pose_scale(model, params);
        const double prior_scale = scale > 0.0 ? scale * scale : 1.0;
        PdmParams next = update_params(model, params, v, weights, cfg.rho, prior_scale);
        Shape next_shape = generate_shape(model, next);
        FitIteration record{r, next_shape, (next.values - params.values).norm(),
                            mean_landmark_error(current, next_shape),
                            evaluate_q_surrogate(model, next, patches, current, weights, cfg.rho, prior_scale)};
        params = std::move(next);
        current = std::move(next_shape);
        const bool converged = record.shape_change < cfg.converge_tol;
        trace.push_back(std::move(record));
        if (converged)
        {
            break;
        }
    }

    std::vector<double> final_weights(n);
    std::vector<bool> occluded(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        final_weights[i] = weigh(extract_patch(stack, i, current.point(i), last_size));
        occluded[i] = final_weights[i] < cfg.occlusion_threshold;
    }
    return FitResult{current,
                     params,
                     std::move(final_weights),
                     std::move(occluded),
                     std::move(trace),
                     coarse.shape,
                     initial,
                     coarse.zero_evidence};
}

} /* namespace ect */

#endif /* ECT_FITTER_HPP */
