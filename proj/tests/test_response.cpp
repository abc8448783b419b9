/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: tests/test_response.cpp
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

#include "ect/response.hpp"
#include "ect/response_io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace ect {
namespace {

Shape single_point_shape(double x, double y)
{
    // Landmark 0 is the one under test; the others only satisfy n >= 3.
    return Shape::from_points({{x, y}, {0.0, 0.0}, {1.0, 1.0}});
}

ResponseStack stack_of(ResponseMap map)
{
    return ResponseStack({std::move(map)});
}

TEST(RenderIdealMap, PeakValueIsTheDensityMaximum)
{
    const auto map = render_ideal_map(single_point_shape(128.0, 128.0), 0, 256, 256, 6.0);
    const auto peak = peak_location(map);
    EXPECT_EQ(peak.location, (PixelCoord{128, 128}));
    EXPECT_FALSE(peak.zero_evidence);
    const double expected = 1.0 / (2.0 * std::numbers::pi * 36.0);
    EXPECT_NEAR(map.at(128, 128), expected, expected * 1e-6);
}

TEST(RenderIdealMap, InvisibleLandmarkIsZero)
{
    const auto map = render_ideal_map(single_point_shape(50.0, 60.0), 0, 64, 64, 6.0, false);
    for (const float v : map.values())
    {
        ASSERT_EQ(v, 0.0f);
    }
}

TEST(RenderIdealMap, InteriorMassIsOne)
{
    const auto map = render_ideal_map(single_point_shape(100.3, 90.7), 0, 200, 200, 6.0);
    double total = 0.0;
    for (const float v : map.values())
    {
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(PeakLocation, RecoversRenderedPosition)
{
    const auto map = render_ideal_map(single_point_shape(40.0, 60.0), 0, 128, 128, 6.0);
    EXPECT_EQ(peak_location(map).location, (PixelCoord{40, 60}));
}

TEST(PeakLocation, RoundTripsRoundedTruthForInteriorLandmarks)
{
    Random rng(1);
    for (int trial = 0; trial < 100; ++trial)
    {
        const double x = rng.uniform(20.0, 100.0);
        const double y = rng.uniform(20.0, 100.0);
        const auto peak = peak_location(render_ideal_map(single_point_shape(x, y), 0, 128, 128, 6.0));
        EXPECT_EQ(peak.location, (PixelCoord{static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))}));
    }
}

TEST(PeakLocation, TiesResolveToFirstInRowMajorOrder)
{
    const auto map = test::make_map(8, 8, [](int x, int y) { return (x == 0 && y == 0) || (x == 5 && y == 5); });
    EXPECT_EQ(peak_location(map).location, (PixelCoord{0, 0}));
}

TEST(PeakLocation, ZeroMapFallsBackToCentre)
{
    const auto peak = peak_location(ResponseMap(10, 16));
    EXPECT_TRUE(peak.zero_evidence);
    EXPECT_EQ(peak.location, (PixelCoord{8, 5}));
}

/// Chebyshev distance of the noisy peak from the rounded truth, per trial.
std::vector<int> noisy_peak_offsets(double amplitude_fraction, std::uint64_t seed)
{
    Random rng(seed);
    std::vector<int> offsets;
    for (int trial = 0; trial < 100; ++trial)
    {
        const double x = rng.uniform(20.0, 44.0);
        const double y = rng.uniform(20.0, 44.0);
        const auto clean = render_ideal_map(single_point_shape(x, y), 0, 64, 64, 6.0);
        const double amplitude = amplitude_fraction / (2.0 * std::numbers::pi * 36.0);
        std::vector<float> values(clean.values().begin(), clean.values().end());
        for (float& v : values)
        {
            v = static_cast<float>(std::max(0.0, v + rng.uniform(-amplitude, amplitude)));
        }
        const auto p = peak_location(ResponseMap(64, 64, std::move(values)));
        offsets.push_back(static_cast<int>(std::max(std::abs(p.location.x - std::lround(x)),
                                                    std::abs(p.location.y - std::lround(y)))));
    }
    return offsets;
}

TEST(PeakLocation, MildNoiseKeepsPeakWithinOnePixel)
{
    // Neighbouring pixels sit within about 3% of the peak, so only mild noise leaves the argmax in place.
    const auto offsets = noisy_peak_offsets(0.05, 2);
    EXPECT_GE(std::count_if(offsets.begin(), offsets.end(), [](int d) { return d <= 1; }), 95);
}

TEST(PeakLocation, StrongNoiseStaysNearTheTruth)
{
    auto offsets = noisy_peak_offsets(0.45, 3);
    std::sort(offsets.begin(), offsets.end());
    EXPECT_LE(offsets[50], 1);
    EXPECT_LE(offsets.back(), 6);
}

TEST(ExtractPatch, CornerPatchIsZeroPadded)
{
    const auto stack = stack_of(test::make_map(20, 20, [](int, int) { return 1.0; }));
    const auto patch = extract_patch(stack, 0, {0.0, 0.0}, 5);
    ASSERT_EQ(patch.values.size(), 25u);
    const auto zeros = std::count(patch.values.begin(), patch.values.end(), 0.0);
    EXPECT_EQ(zeros, 16);
}

TEST(ExtractPatch, InteriorWindowCopiesSubmatrix)
{
    const auto stack = stack_of(test::make_map(30, 40, [](int x, int y) { return x + 100.0 * y; }));
    const auto patch = extract_patch(stack, 0, {20.0, 15.0}, 7);
    std::size_t k = 0;
    for (int y = 12; y <= 18; ++y)
    {
        for (int x = 17; x <= 23; ++x, ++k)
        {
            EXPECT_EQ(patch.values[k], x + 100.0 * y);
            EXPECT_EQ(patch.omega[k], Eigen::Vector2d(x, y));
        }
    }
}

TEST(ExtractPatch, RoundsHalfAwayFromZero)
{
    const auto stack = stack_of(ResponseMap(10, 10));
    EXPECT_EQ(extract_patch(stack, 0, {2.5, 3.5}, 3).center, (PixelCoord{3, 4}));
    EXPECT_EQ(extract_patch(stack, 0, {-2.5, 2.49}, 3).center, (PixelCoord{-3, 2}));
}

TEST(ExtractPatch, TranslationConsistent)
{
    const auto f = [](int x, int y) { return std::sin(0.3 * x) + std::cos(0.2 * y) + 2.0; };
    const auto a = stack_of(test::make_map(64, 64, f));
    const auto b = stack_of(test::make_map(64, 64, [&](int x, int y) { return f(x - 5, y + 3); }));
    const auto pa = extract_patch(a, 0, {30.0, 30.0}, 9);
    const auto pb = extract_patch(b, 0, {35.0, 27.0}, 9);
    EXPECT_EQ(pa.values, pb.values);
}

TEST(ExtractPatch, GaussianMomentMatchesItsMean)
{
    const auto stack = stack_of(render_ideal_map(single_point_shape(30.4, 28.8), 0, 64, 64, 3.0));
    const auto patch = normalize_patch(extract_patch(stack, 0, {30.0, 29.0}, 25));
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < patch.values.size(); ++k)
    {
        mean += patch.values[k] * patch.omega[k];
    }
    EXPECT_LT((mean - Eigen::Vector2d(30.4, 28.8)).norm(), 0.05);
}

TEST(ExtractPatch, RejectsEvenOrTinySizes)
{
    const auto stack = stack_of(ResponseMap(10, 10));
    EXPECT_THROW(extract_patch(stack, 0, {5.0, 5.0}, 4), Error);
    EXPECT_THROW(extract_patch(stack, 0, {5.0, 5.0}, 1), Error);
}

TEST(NormalizePatch, UniformSingleAndRandom)
{
    const auto uniform = stack_of(test::make_map(20, 20, [](int, int) { return 0.7; }));
    for (const double v : normalize_patch(extract_patch(uniform, 0, {10.0, 10.0}, 5)).values)
    {
        EXPECT_NEAR(v, 1.0 / 25.0, 1e-15);
    }
    const auto single = stack_of(test::make_map(20, 20, [](int x, int y) { return x == 10 && y == 9 ? 3.0 : 0.0; }));
    const auto p = normalize_patch(extract_patch(single, 0, {10.0, 10.0}, 3));
    EXPECT_EQ(p.values[1], 1.0);

    Random rng(3);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto random = stack_of(test::make_map(15, 15, [&](int, int) { return rng.uniform(0.0, 5.0); }));
        const auto n = normalize_patch(extract_patch(random, 0, {7.0, 7.0}, 9));
        EXPECT_NEAR(n.mass(), 1.0, 1e-12);
        const auto twice = normalize_patch(n);
        for (std::size_t k = 0; k < n.values.size(); ++k)
        {
            EXPECT_NEAR(twice.values[k], n.values[k], 1e-15);
        }
    }
}

TEST(NormalizePatch, EmptyPatchIsZeroEvidence)
{
    const auto stack = stack_of(ResponseMap(10, 10));
    try
    {
        normalize_patch(extract_patch(stack, 0, {5.0, 5.0}, 3));
        FAIL() << "expected an error";
    } catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroEvidence);
    }
}

TEST(ResponseMap, RejectsNegativeOrNonFiniteValues)
{
    EXPECT_THROW(ResponseMap(1, 2, {1.0f, -1.0f}), Error);
    EXPECT_THROW(ResponseMap(1, 2, {1.0f, std::nanf("")}), Error);
    EXPECT_THROW(ResponseStack({ResponseMap(2, 2), ResponseMap(2, 3)}), Error);
}

TEST(Rspm, RoundTripIsBitExact)
{
    Random rng(4);
    std::vector<ResponseMap> maps;
    for (int i = 0; i < 3; ++i)
    {
        maps.push_back(test::make_map(7, 9, [&](int, int) { return rng.uniform(0.0, 1.0); }));
    }
    const ResponseStack stack(std::move(maps));
    const std::string bytes = encode_rspm(stack);
    EXPECT_EQ(bytes.size(), 20u + 4u * 3u * 7u * 9u);
    const auto back = decode_rspm(bytes);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
    {
        EXPECT_TRUE(std::equal(back.map(i).values().begin(), back.map(i).values().end(),
                               stack.map(i).values().begin()));
    }
    EXPECT_EQ(encode_rspm(back), bytes);
}

TEST(Rspm, CorruptInputsAreFormatErrors)
{
    const std::string good = encode_rspm(stack_of(ResponseMap(4, 4)));
    std::string magic = good;
    magic[0] = 'X';
    std::string version = good;
    version[4] = 9;
    std::string negative = good;
    negative.replace(20, 4, std::string("\x00\x00\x80\xbf", 4)); // -1.0f
    for (const auto& bytes : {magic, version, good.substr(0, good.size() - 1), good + "x", negative})
    {
        try
        {
            decode_rspm(bytes);
            ADD_FAILURE() << "accepted a corrupt stack";
        } catch (const Error& e)
        {
            EXPECT_EQ(e.kind(), ErrorKind::Format);
        }
    }
}

} // namespace
} // namespace ect
