/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/metrics.hpp
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

#ifndef ECT_METRICS_HPP
#define ECT_METRICS_HPP

#include "ect/error.hpp"
#include "ect/shape.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace ect {

/**
 * Normalised mean error: mean Euclidean landmark error over the masked
 * (visible) landmarks, divided by d. An empty mask means "all landmarks".
 */
inline double nme(const Shape& pred, const Shape& truth, double d, const std::vector<bool>& mask = {})
{
    detail::require(pred.size() == truth.size(), ErrorKind::DimensionMismatch, "nme: landmark counts differ");
    detail::require(std::isfinite(d) && d > 0.0, ErrorKind::InvalidArgument, "nme: normaliser must be positive");
    detail::require(mask.empty() || mask.size() == truth.size(), ErrorKind::DimensionMismatch,
                    "nme: mask length does not match the landmark count");
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        if (!mask.empty() && !mask[i])
        {
            continue;
        }
        total += (pred.point(i) - truth.point(i)).norm();
        ++used;
    }
    if (used == 0)
    {
        detail::fail(ErrorKind::InvalidArgument, "nme: mask selects no landmarks");
    }
    return total / static_cast<double>(used) / d;
}

/// Mean landmark error in pixels over the masked landmarks (MAPE).
inline double mean_pixel_error(const Shape& pred, const Shape& truth, const std::vector<bool>& mask = {})
{
    return nme(pred, truth, 1.0, mask);
}

/// Distance between two landmarks (e.g. the outer eye corners).
inline double inter_ocular_distance(const Shape& truth, std::size_t left, std::size_t right)
{
    detail::require(left < truth.size() && right < truth.size(), ErrorKind::InvalidArgument,
                    "inter-ocular landmark index out of range");
    return (truth.point(left) - truth.point(right)).norm();
}

/// Distance between the centroids of two landmark groups (estimated pupils).
inline double inter_pupil_distance(const Shape& truth, const std::vector<std::size_t>& left_eye,
                                   const std::vector<std::size_t>& right_eye)
{
    detail::require(!left_eye.empty() && !right_eye.empty(), ErrorKind::InvalidArgument,
                    "inter-pupil distance needs both eye groups");
    const auto group_centre = [&](const std::vector<std::size_t>& group) {
        Eigen::Vector2d c = Eigen::Vector2d::Zero();
        for (const std::size_t i : group)
        {
            detail::require(i < truth.size(), ErrorKind::InvalidArgument, "eye landmark index out of range");
            c += truth.point(i);
        }
        return Eigen::Vector2d(c / static_cast<double>(group.size()));
    };
    return (group_centre(left_eye) - group_centre(right_eye)).norm();
}

/// sqrt(width * height) of the landmark bounding box.
inline double bbox_size(const Shape& truth)
{
    const Eigen::Index n = static_cast<Eigen::Index>(truth.size());
    const auto pts = truth.coords().reshaped(2, n);
    const Eigen::Vector2d extent = pts.rowwise().maxCoeff() - pts.rowwise().minCoeff();
    return std::sqrt(extent.x() * extent.y());
}

struct CedCurve
{
    std::vector<double> thresholds;
    std::vector<double> fractions;
    double auc = 0.0;
    double failure_rate = 0.0;
};

/**
 * Cumulative error distribution on a uniform grid of samples thresholds over
 * [0, cutoff], with AUC and failure rate at the cutoff.
 *
 * The CED is a step function, so its integral is taken exactly:
 * AUC = mean_k max(0, cutoff - e_k) / cutoff.
 */
inline CedCurve ced_auc(const std::vector<double>& errors, double cutoff, std::size_t samples = 1000)
{
    detail::require(!errors.empty(), ErrorKind::InvalidArgument, "ced_auc: no errors given");
    detail::require(std::isfinite(cutoff) && cutoff > 0.0, ErrorKind::InvalidArgument,
                    "ced_auc: cutoff must be positive");
    detail::require(samples >= 2, ErrorKind::InvalidArgument, "ced_auc: need at least 2 samples");
    std::vector<double> sorted = errors;
    for (const double e : sorted)
    {
        detail::require(std::isfinite(e) && e >= 0.0, ErrorKind::InvalidArgument,
                        "ced_auc: errors must be finite and non-negative");
    }
    std::sort(sorted.begin(), sorted.end());
    const auto count = static_cast<double>(sorted.size());

    CedCurve curve;
    curve.thresholds.resize(samples);
    curve.fractions.resize(samples);
    for (std::size_t k = 0; k < samples; ++k)
    {
        const double t = k + 1 == samples ? cutoff : cutoff * static_cast<double>(k) / static_cast<double>(samples - 1);
        curve.thresholds[k] = t;
        const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        curve.fractions[k] = static_cast<double>(below) / count;
    }
    double area = 0.0;
    for (const double e : sorted)
    {
        area += std::max(0.0, cutoff - e);
    }
    curve.auc = area / count / cutoff;
    curve.failure_rate = 1.0 - curve.fractions.back();
    return curve;
}

struct PrecisionRecall
{
    double threshold = 0.0;
    std::optional<double> precision; ///< absent when nothing is predicted occluded
    std::optional<double> recall;    ///< absent when nothing is truly occluded
};

struct OcclusionReport
{
    std::vector<PrecisionRecall> sweep;
    /// Recall at the threshold whose precision is closest to 0.8 from above.
    std::optional<double> recall_at_precision80;
    std::optional<double> threshold_at_precision80;
};

/// Precision and recall of "weight < threshold" as an occlusion detector, for one threshold.
inline PrecisionRecall occlusion_precision_recall(const std::vector<double>& weights,
                                                  const std::vector<bool>& truth_occluded, double threshold)
{
    detail::require(weights.size() == truth_occluded.size(), ErrorKind::DimensionMismatch,
                    "occlusion_pr: one weight per landmark required");
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        const bool predicted = weights[i] < threshold;
        tp += predicted && truth_occluded[i];
        fp += predicted && !truth_occluded[i];
        fn += !predicted && truth_occluded[i];
    }
    PrecisionRecall pr{threshold, std::nullopt, std::nullopt};
    if (tp + fp > 0)
    {
        pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn > 0)
    {
        pr.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    return pr;
}

inline OcclusionReport occlusion_pr(const std::vector<double>& weights, const std::vector<bool>& truth_occluded,
                                    const std::vector<double>& thresholds)
{
    for (const double w : weights)
    {
        detail::require(w >= 0.0 && w <= 1.0, ErrorKind::InvalidArgument, "occlusion_pr: weights must lie in [0, 1]");
    }
    OcclusionReport report;
    for (const double t : thresholds)
    {
        report.sweep.push_back(occlusion_precision_recall(weights, truth_occluded, t));
    }
    std::optional<double> best_precision;
    for (const auto& pr : report.sweep)
    {
        if (!pr.precision || !pr.recall || *pr.precision < 0.8)
        {
            continue;
        }
        const bool closer = !best_precision || *pr.precision < *best_precision;
        const bool tie_better = best_precision && *pr.precision == *best_precision &&
                                *pr.recall > *report.recall_at_precision80;
        if (closer || tie_better)
        {
            best_precision = pr.precision;
            report.recall_at_precision80 = pr.recall;
            report.threshold_at_precision80 = pr.threshold;
        }
    }
    return report;
}

/// Evenly spaced thresholds over [0, 1], endpoints included.
inline std::vector<double> uniform_thresholds(std::size_t count = 101)
{
    std::vector<double> t(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        t[k] = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 0.5;
    }
    return t;
}

} /* namespace ect */

#endif /* ECT_METRICS_HPP */
