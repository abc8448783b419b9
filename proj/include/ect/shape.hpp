/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/shape.hpp
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

#ifndef ECT_SHAPE_HPP
#define ECT_SHAPE_HPP

#include "ect/error.hpp"

#include "Eigen/Core"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace ect {

/**
 * A 2D landmark shape stored as the interleaved coordinate vector
 * (x1, y1, ..., xn, yn), in image pixels.
 *
 * Always holds at least 3 landmarks with finite coordinates.
 */
class Shape
{
public:
    explicit Shape(Eigen::VectorXd coords) : coords_(std::move(coords))
    {
        detail::require(coords_.size() % 2 == 0, ErrorKind::InvalidArgument,
                        "shape coordinate vector must have even length");
        detail::require(coords_.size() >= 6, ErrorKind::InvalidArgument, "shape must have at least 3 landmarks");
        detail::require(coords_.allFinite(), ErrorKind::InvalidArgument, "shape coordinates must be finite");
    }

    static Shape from_points(const std::vector<Eigen::Vector2d>& points)
    {
        Eigen::VectorXd coords(2 * static_cast<Eigen::Index>(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            coords.segment<2>(2 * static_cast<Eigen::Index>(i)) = points[i];
        }
        return Shape(std::move(coords));
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(coords_.size() / 2); }

    Eigen::Vector2d point(std::size_t i) const { return coords_.segment<2>(2 * static_cast<Eigen::Index>(i)); }

    const Eigen::VectorXd& coords() const noexcept { return coords_; }

    bool operator==(const Shape& other) const { return coords_ == other.coords_; }

private:
    Eigen::VectorXd coords_;
};

/**
 * Similarity transform x -> scale * R(angle) * x + translation.
 */
class SimilarityTransform
{
public:
    SimilarityTransform() = default;

    SimilarityTransform(double scale, double angle, Eigen::Vector2d translation)
        : scale_(scale), angle_(angle), translation_(std::move(translation))
    {
        detail::require(std::isfinite(scale) && scale > 0.0, ErrorKind::InvalidArgument,
                        "similarity scale must be positive and finite");
        detail::require(std::isfinite(angle) && translation_.allFinite(), ErrorKind::InvalidArgument,
                        "similarity parameters must be finite");
    }

    double scale() const noexcept { return scale_; }
    double angle() const noexcept { return angle_; }
    const Eigen::Vector2d& translation() const noexcept { return translation_; }

    Eigen::Matrix2d rotation() const
    {
        const double c = std::cos(angle_);
        const double s = std::sin(angle_);
        Eigen::Matrix2d r;
        r << c, -s, s, c;
        return r;
    }

    Eigen::Vector2d apply(const Eigen::Vector2d& x) const { return scale_ * (rotation() * x) + translation_; }

    SimilarityTransform inverse() const
    {
        const double inv_scale = 1.0 / scale_;
        const Eigen::Vector2d t = -inv_scale * (rotation().transpose() * translation_);
        return SimilarityTransform(inv_scale, -angle_, t);
    }

private:
    double scale_ = 1.0;
    double angle_ = 0.0;
    Eigen::Vector2d translation_ = Eigen::Vector2d::Zero();
};

inline Eigen::Vector2d centroid(const Shape& shape)
{
    const auto pts = shape.coords().reshaped(2, static_cast<Eigen::Index>(shape.size()));
    return pts.rowwise().mean();
}

/// Coordinates with the centroid subtracted.
inline Eigen::VectorXd centered_coords(const Shape& shape)
{
    Eigen::VectorXd c = shape.coords();
    c.reshaped(2, static_cast<Eigen::Index>(shape.size())).colwise() -= centroid(shape);
    return c;
}

inline Shape apply_similarity(const SimilarityTransform& transform, const Shape& shape)
{
    const Eigen::Index n = static_cast<Eigen::Index>(shape.size());
    Eigen::Matrix2Xd pts = shape.coords().reshaped(2, n);
    Eigen::Matrix2Xd mapped = (transform.scale() * transform.rotation()) * pts;
    mapped.colwise() += transform.translation();
    return Shape(mapped.reshaped());
}

/**
 * Least-squares similarity from src onto dst, minimising
 * sum_i |s R src_i + t - dst_i|^2 with det(R) = +1.
 *
 * Closed form from the centred cross-covariance; treating each landmark as a
 * complex number, s e^{i angle} = <dst_c, src_c> / |src_c|^2.
 */
inline SimilarityTransform optimal_similarity(const Shape& src, const Shape& dst)
{
    detail::require(src.size() == dst.size(), ErrorKind::DimensionMismatch,
                    "optimal_similarity: landmark counts differ");
    const Eigen::Index n = static_cast<Eigen::Index>(src.size());
    const Eigen::Vector2d src_mean = centroid(src);
    const Eigen::Vector2d dst_mean = centroid(dst);
    const Eigen::Matrix2Xd a = src.coords().reshaped(2, n).colwise() - src_mean;
    const Eigen::Matrix2Xd b = dst.coords().reshaped(2, n).colwise() - dst_mean;

    const double norm2 = a.squaredNorm();
    // Relative to the raw coordinate magnitude so that shapes far from the origin are judged fairly.
    const double magnitude = std::max(1.0, src.coords().squaredNorm());
    if (!(norm2 > 1e-24 * magnitude))
    {
        detail::fail(ErrorKind::AlignmentDegenerate, "optimal_similarity: source shape is degenerate");
    }
    const double re = (a.row(0).dot(b.row(0)) + a.row(1).dot(b.row(1))) / norm2;
    const double im = (a.row(0).dot(b.row(1)) - a.row(1).dot(b.row(0))) / norm2;
    const double scale = std::hypot(re, im);
    if (!(scale > 0.0))
    {
        detail::fail(ErrorKind::AlignmentDegenerate, "optimal_similarity: target shape is degenerate");
    }
    const double angle = std::atan2(im, re);
    Eigen::Matrix2d sr;
    sr << re, -im, im, re;
    return SimilarityTransform(scale, angle, dst_mean - sr * src_mean);
}

/// Mean Euclidean distance between corresponding landmarks, in pixels.
inline double mean_landmark_error(const Shape& a, const Shape& b)
{
    detail::require(a.size() == b.size(), ErrorKind::DimensionMismatch, "landmark counts differ");
    const Eigen::Index n = static_cast<Eigen::Index>(a.size());
    return (a.coords() - b.coords()).reshaped(2, n).colwise().norm().mean();
}

} /* namespace ect */

#endif /* ECT_SHAPE_HPP */
