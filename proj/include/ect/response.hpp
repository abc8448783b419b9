/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/response.hpp
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

#ifndef ECT_RESPONSE_HPP
#define ECT_RESPONSE_HPP

#include "ect/error.hpp"
#include "ect/shape.hpp"

#include "Eigen/Core"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace ect {

/// Integer pixel position; x is the column, y the row.
struct PixelCoord
{
    int x = 0;
    int y = 0;

    bool operator==(const PixelCoord&) const = default;
};

/**
 * One single-channel, non-negative likelihood map of size height x width,
 * stored row-major as float32 (the on-disk precision).
 */
class ResponseMap
{
public:
    ResponseMap(int height, int width) : height_(height), width_(width)
    {
        detail::require(height > 0 && width > 0, ErrorKind::InvalidArgument, "response map must be non-empty");
        values_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0.0f);
    }

    ResponseMap(int height, int width, std::vector<float> values)
        : height_(height), width_(width), values_(std::move(values))
    {
        detail::require(height > 0 && width > 0, ErrorKind::InvalidArgument, "response map must be non-empty");
        detail::require(values_.size() == static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
                        ErrorKind::DimensionMismatch, "response map value count does not match its size");
        for (const float v : values_)
        {
            detail::require(std::isfinite(v) && v >= 0.0f, ErrorKind::InvalidArgument,
                            "response values must be finite and non-negative");
        }
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    float at(int row, int col) const
    {
        return values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(col)];
    }

    bool contains(long long x, long long y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::span<const float> values() const noexcept { return values_; }

private:
    int height_;
    int width_;
    std::vector<float> values_;
};

/// n response maps sharing one canvas size.
class ResponseStack
{
public:
    explicit ResponseStack(std::vector<ResponseMap> maps) : maps_(std::move(maps))
    {
        detail::require(!maps_.empty(), ErrorKind::InvalidArgument, "response stack must hold at least one map");
        for (const auto& m : maps_)
        {
            detail::require(m.height() == maps_.front().height() && m.width() == maps_.front().width(),
                            ErrorKind::DimensionMismatch, "all response maps must share one size");
        }
    }

    std::size_t size() const noexcept { return maps_.size(); }
    int height() const noexcept { return maps_.front().height(); }
    int width() const noexcept { return maps_.front().width(); }
    const ResponseMap& map(std::size_t i) const { return maps_.at(i); }
    const std::vector<ResponseMap>& maps() const noexcept { return maps_; }

private:
    std::vector<ResponseMap> maps_;
};

/**
 * Ideal response of one landmark: the isotropic bivariate normal density
 * N(z; x_i, sigma^2 I) sampled at every pixel z = (col, row). Invisible
 * landmarks get an all-zero map.
 */
inline ResponseMap render_ideal_map(const Shape& truth, std::size_t i, int height, int width, double sigma,
                                    bool visible = true)
{
    detail::require(i < truth.size(), ErrorKind::InvalidArgument, "landmark index out of range");
    detail::require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidArgument, "sigma must be positive");
    ResponseMap blank(height, width);
    if (!visible)
    {
        return blank;
    }
    const Eigen::Vector2d mu = truth.point(i);
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    std::vector<double> gx(static_cast<std::size_t>(width));
    std::vector<double> gy(static_cast<std::size_t>(height));
    for (int c = 0; c < width; ++c)
    {
        const double d = c - mu.x();
        gx[static_cast<std::size_t>(c)] = std::exp(-d * d * inv_two_var);
    }
    for (int r = 0; r < height; ++r)
    {
        const double d = r - mu.y();
        gy[static_cast<std::size_t>(r)] = norm * std::exp(-d * d * inv_two_var);
    }
    std::vector<float> values(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
    for (int r = 0; r < height; ++r)
    {
        for (int c = 0; c < width; ++c)
        {
            values[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)] =
                static_cast<float>(gy[static_cast<std::size_t>(r)] * gx[static_cast<std::size_t>(c)]);
        }
    }
    return ResponseMap(height, width, std::move(values));
}

struct Peak
{
    PixelCoord location;
    bool zero_evidence = false;
};

/**
 * Row-major-first argmax. An all-zero map has no evidence; the map centre
 * (width/2, height/2) is returned and flagged.
 */
inline Peak peak_location(const ResponseMap& map)
{
    const auto values = map.values();
    std::size_t best = 0;
    float best_value = values[0];
    for (std::size_t k = 1; k < values.size(); ++k)
    {
        if (values[k] > best_value)
        {
            best_value = values[k];
            best = k;
        }
    }
    if (!(best_value > 0.0f))
    {
        return {{map.width() / 2, map.height() / 2}, true};
    }
    const auto w = static_cast<std::size_t>(map.width());
    return {{static_cast<int>(best % w), static_cast<int>(best / w)}, false};
}

/**
 * r x r window of one response map around an integer centre. Cells outside
 * the map are zero. values and omega are both row-major over the window, so
 * values[k] is the response at omega[k].
 */
struct PatchResponse
{
    std::size_t landmark = 0;
    PixelCoord center;
    int size = 0;
    std::vector<double> values;
    std::vector<Eigen::Vector2d> omega;

    double mass() const
    {
        double total = 0.0;
        for (const double v : values)
        {
            total += v;
        }
        return total;
    }
};

namespace detail {

/// Nearest integer, halves away from zero, saturated well inside int range.
inline int round_pixel(double v)
{
    const double r = std::round(std::clamp(v, -1e9, 1e9));
    return static_cast<int>(r);
}

} /* namespace detail */

inline PatchResponse extract_patch(const ResponseStack& stack, std::size_t i, const Eigen::Vector2d& center, int r)
{
    detail::require(r >= 3 && r % 2 == 1, ErrorKind::InvalidArgument, "patch size must be odd and >= 3");
    detail::require(center.allFinite(), ErrorKind::InvalidArgument, "patch centre must be finite");
    detail::require(i < stack.size(), ErrorKind::InvalidArgument, "landmark index out of range");
    const ResponseMap& map = stack.map(i);
    PatchResponse patch;
    patch.landmark = i;
    patch.center = {detail::round_pixel(center.x()), detail::round_pixel(center.y())};
    patch.size = r;
    const auto cells = static_cast<std::size_t>(r) * static_cast<std::size_t>(r);
    patch.values.resize(cells, 0.0);
    patch.omega.resize(cells);
    const int half = r / 2;
    std::size_t k = 0;
    for (int dy = -half; dy <= half; ++dy)
    {
        for (int dx = -half; dx <= half; ++dx, ++k)
        {
            const long long x = static_cast<long long>(patch.center.x) + dx;
            const long long y = static_cast<long long>(patch.center.y) + dy;
            patch.omega[k] = Eigen::Vector2d(static_cast<double>(x), static_cast<double>(y));
            if (map.contains(x, y))
            {
                patch.values[k] = map.at(static_cast<int>(y), static_cast<int>(x));
            }
        }
    }
    return patch;
}

/// Scales the patch so that its values sum to one.
inline PatchResponse normalize_patch(PatchResponse patch)
{
    const double total = patch.mass();
    if (!(total > 0.0))
    {
        detail::fail(ErrorKind::ZeroEvidence, "normalize_patch: patch carries no response mass");
    }
    for (double& v : patch.values)
    {
        v /= total;
    }
    return patch;
}

} /* namespace ect */

#endif /* ECT_RESPONSE_HPP */
