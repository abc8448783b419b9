/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/random.hpp
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

#ifndef ECT_RANDOM_HPP
#define ECT_RANDOM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace ect {

/**
 * Seeded generator with distributions written out explicitly. The standard
 * distributions are implementation-defined, which would make synthetic data
 * differ between standard libraries; mt19937_64 itself is fully specified.
 */
class Random
{
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound).
    std::size_t index(std::size_t bound)
    {
        return static_cast<std::size_t>(uniform() * static_cast<double>(bound)) % bound;
    }

    /// Standard normal via Box-Muller.
    double normal()
    {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// k distinct indices from [0, n), by partial Fisher-Yates, sorted ascending.
    std::vector<std::size_t> choose(std::size_t n, std::size_t k)
    {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            pool[i] = i;
        }
        for (std::size_t i = 0; i < k && i < n; ++i)
        {
            const std::size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(std::min(k, n));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

} /* namespace ect */

#endif /* ECT_RANDOM_HPP */
