/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/procrustes.hpp
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

#ifndef ECT_PROCRUSTES_HPP
#define ECT_PROCRUSTES_HPP

#include "ect/error.hpp"
#include "ect/shape.hpp"

#include <cstddef>
#include <vector>

namespace ect {

struct ProcrustesResult
{
    std::vector<Shape> aligned;
    Shape mean;        ///< centred at the origin, unit Frobenius norm
    int iterations = 0;
};

/// Centre at the origin and scale to unit Frobenius norm.
inline Shape normalize_shape(const Shape& shape)
{
    Eigen::VectorXd c = centered_coords(shape);
    const double norm = c.norm();
    const double magnitude = std::max(1.0, shape.coords().norm());
    if (!(norm > 1e-12 * magnitude))
    {
        detail::fail(ErrorKind::AlignmentDegenerate, "shape is degenerate (all landmarks coincide)");
    }
    return Shape(c / norm);
}

/**
 * Generalised (ordinary) Procrustes analysis.
 *
 * The reference starts as the normalised first shape. Each round aligns
 * every shape to the reference with the optimal similarity, averages, and
 * re-normalises the average; its rotation is pinned to the initial reference
 * so the frame cannot drift. Stops once the reference moves less than tol
 * (L2) or after max_iters rounds. The returned shapes are aligned to the
 * final mean.
 */
inline ProcrustesResult procrustes_align(const std::vector<Shape>& shapes, int max_iters = 100, double tol = 1e-10)
{
    if (shapes.size() < 2)
    {
        detail::fail(ErrorKind::InsufficientData, "procrustes_align needs at least 2 shapes");
    }
    const std::size_t n = shapes.front().size();
    for (const auto& s : shapes)
    {
        detail::require(s.size() == n, ErrorKind::DimensionMismatch, "procrustes_align: landmark counts differ");
    }

    const Shape initial = normalize_shape(shapes.front());
    Shape mean = initial;
    std::vector<Shape> aligned;
    aligned.reserve(shapes.size());
    int iteration = 0;
    for (; iteration < max_iters; ++iteration)
    {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(mean.coords().size());
        for (const auto& s : shapes)
        {
            sum += apply_similarity(optimal_similarity(s, mean), s).coords();
        }
        Shape next = normalize_shape(Shape(sum / static_cast<double>(shapes.size())));
        const SimilarityTransform pin = optimal_similarity(next, initial);
        next = apply_similarity(SimilarityTransform(1.0, pin.angle(), Eigen::Vector2d::Zero()), next);
        const double change = (next.coords() - mean.coords()).norm();
        mean = next;
        if (change < tol)
        {
            ++iteration;
            break;
        }
    }
    for (const auto& s : shapes)
    {
        aligned.push_back(apply_similarity(optimal_similarity(s, mean), s));
    }
    return {std::move(aligned), std::move(mean), iteration};
}

} /* namespace ect */

#endif /* ECT_PROCRUSTES_HPP */
