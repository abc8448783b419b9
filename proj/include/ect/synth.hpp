/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/synth.hpp
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

#ifndef ECT_SYNTH_HPP
#define ECT_SYNTH_HPP

#include "ect/error.hpp"
#include "ect/pdm.hpp"
#include "ect/pts_io.hpp"
#include "ect/random.hpp"
#include "ect/response.hpp"
#include "ect/shape.hpp"

#include "Eigen/Core"
#include "Eigen/Eigenvalues"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace ect {

/// Ranges of the random pose placed on a synthetic shape.
struct PoseJitter
{
    /// Root-mean-square landmark distance from the centroid, pixels.
    double rms_radius_min = 60.0;
    double rms_radius_max = 70.0;
    double rotation_max = 0.2;    ///< radians, symmetric
    double translation_max = 8.0; ///< centroid offset from the canvas centre, pixels
};

struct ScenarioConfig
{
    std::uint64_t seed = 0;
    int height = 256;
    int width = 256;
    double sigma = 6.0;
    double noise_amplitude = 0.0;   ///< fraction of each map's peak
    double occluded_fraction = 0.0; ///< fraction of maps zeroed
    PoseJitter pose;
    double mode_scale = 2.0;        ///< q_j drawn uniformly within +-mode_scale * sqrt(lambda_j)
    int max_retries = 100;

    void validate() const
    {
        using detail::require;
        require(height > 0 && width > 0, ErrorKind::InvalidArgument, "canvas must be non-empty");
        require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidArgument, "sigma must be positive");
        require(noise_amplitude >= 0.0 && noise_amplitude <= 1.0, ErrorKind::InvalidArgument,
                "noise_amplitude must lie in [0, 1]");
        require(occluded_fraction >= 0.0 && occluded_fraction <= 1.0, ErrorKind::InvalidArgument,
                "occluded_fraction must lie in [0, 1]");
        require(pose.rms_radius_min > 0.0 && pose.rms_radius_min <= pose.rms_radius_max, ErrorKind::InvalidArgument,
                "pose radius range is invalid");
        require(pose.rotation_max >= 0.0 && pose.translation_max >= 0.0, ErrorKind::InvalidArgument,
                "pose jitter ranges must be non-negative");
        require(mode_scale >= 0.0, ErrorKind::InvalidArgument, "mode_scale must be >= 0");
        require(max_retries >= 1, ErrorKind::InvalidArgument, "max_retries must be >= 1");
    }
};

struct Scenario
{
    Shape truth;
    PdmParams truth_params;
    ResponseStack stack;
    std::vector<bool> occluded;
    SimilarityTransform pose;
    std::uint64_t seed = 0;
};

/**
 * Draws a shape from the model and renders its response stack.
 *
 * The shape is mean + S p with q_j = scale * u_j, u_j uniform in
 * +-mode_scale * sqrt(lambda_j), so it lies exactly in the model span.
 * Poses that put a landmark off the canvas are redrawn. Visible maps get
 * uniform noise in +-noise_amplitude * peak, clipped at zero; a random
 * subset of round(occluded_fraction * n) maps is zero.
 */
inline Scenario sample_scenario(const PointDistributionModel& model, const ScenarioConfig& cfg)
{
    cfg.validate();
    Random rng(cfg.seed);
    const std::size_t n = model.num_landmarks();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const Eigen::Vector2d canvas_centre(0.5 * (cfg.width - 1), 0.5 * (cfg.height - 1));

    for (int attempt = 0; attempt < cfg.max_retries; ++attempt)
    {
        const double scale = rng.uniform(cfg.pose.rms_radius_min, cfg.pose.rms_radius_max) * sqrt_n;
        const double angle = rng.uniform(-cfg.pose.rotation_max, cfg.pose.rotation_max);
        const Eigen::Vector2d offset(rng.uniform(-cfg.pose.translation_max, cfg.pose.translation_max),
                                     rng.uniform(-cfg.pose.translation_max, cfg.pose.translation_max));
        PdmParams p = PdmParams::zero(model.num_params());
        for (Eigen::Index j = 0; j < model.num_modes(); ++j)
        {
            const double bound = cfg.mode_scale * std::sqrt(model.eigenvalues()[j]);
            p.values[num_similarity_params + j] = scale * rng.uniform(-bound, bound);
        }
        // The canonical mean is centred, so the translation is the centroid.
        const SimilarityTransform pose(scale, angle, canvas_centre + offset);
        p.values.head(num_similarity_params) = similarity_params(model, pose);
        Shape truth = generate_shape(model, p);

        bool inside = true;
        for (std::size_t i = 0; i < n && inside; ++i)
        {
            const auto x = truth.point(i);
            inside = x.x() >= 0.0 && x.y() >= 0.0 && x.x() <= cfg.width - 1 && x.y() <= cfg.height - 1;
        }
        if (!inside)
        {
            continue;
        }

        const auto hidden_count = static_cast<std::size_t>(std::llround(cfg.occluded_fraction * static_cast<double>(n)));
        std::vector<bool> occluded(n, false);
        for (const std::size_t i : rng.choose(n, hidden_count))
        {
            occluded[i] = true;
        }

        std::vector<ResponseMap> maps;
        maps.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            ResponseMap ideal = render_ideal_map(truth, i, cfg.height, cfg.width, cfg.sigma, !occluded[i]);
            if (occluded[i] || cfg.noise_amplitude == 0.0)
            {
                maps.push_back(std::move(ideal));
                continue;
            }
            const auto src = ideal.values();
            float peak = 0.0f;
            for (const float value : src)
            {
                peak = std::max(peak, value);
            }
            const double amplitude = cfg.noise_amplitude * peak;
            std::vector<float> noisy(src.size());
            for (std::size_t k = 0; k < src.size(); ++k)
            {
                const double value = src[k] + rng.uniform(-amplitude, amplitude);
                noisy[k] = static_cast<float>(std::max(value, 0.0));
            }
            maps.emplace_back(cfg.height, cfg.width, std::move(noisy));
        }
        return Scenario{std::move(truth), std::move(p), ResponseStack(std::move(maps)), std::move(occluded), pose,
                        cfg.seed};
    }
    detail::fail(ErrorKind::InvalidArgument,
                 "sample_scenario: no pose kept the shape on the canvas within the retry budget");
}

/**
 * Description of a synthetic training corpus: a base polygon, orthonormal
 * deformation modes with their standard deviations (pixels, in the base
 * frame), and the similarity jitter applied to each sample.
 */
struct GeneratorSpec
{
    Shape base;
    Eigen::MatrixXd modes;          ///< 2n x k, orthonormal, orthogonal to the base's similarity span
    Eigen::VectorXd mode_stddevs;   ///< k entries
    double scale_jitter = 0.1;      ///< relative, symmetric
    double rotation_jitter = 0.3;   ///< radians, symmetric
    double translation_jitter = 20.0;
    std::uint64_t seed = 1;
};

/**
 * Face-like generator: n landmarks on a lobed closed curve with rms radius
 * rms_radius, plus k smooth harmonic deformation modes whose standard
 * deviations fall geometrically from stddev_max to stddev_min (pixels,
 * measured as the Frobenius norm of the displacement).
 */
inline GeneratorSpec make_generator_spec(std::size_t n, Eigen::Index k, double rms_radius = 45.0,
                                         double stddev_max = 25.0, double stddev_min = 8.0,
                                         std::uint64_t seed = 1)
{
    detail::require(n >= 3, ErrorKind::InvalidArgument, "generator needs at least 3 landmarks");
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::VectorXd base(2 * ni);
    for (Eigen::Index i = 0; i < ni; ++i)
    {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        const double radius = 1.0 + 0.25 * std::cos(3.0 * t + 0.4) + 0.1 * std::sin(2.0 * t);
        base[2 * i] = 0.8 * radius * std::cos(t);
        base[2 * i + 1] = radius * std::sin(t);
    }
    base.reshaped(2, ni).colwise() -= base.reshaped(2, ni).rowwise().mean();
    base *= rms_radius * std::sqrt(static_cast<double>(n)) / base.norm();
    Shape base_shape(base);

    Eigen::MatrixXd raw(2 * ni, 2 * k + 4);
    for (Eigen::Index c = 0; c < raw.cols(); ++c)
    {
        const double freq = 1.0 + static_cast<double>(c / 2);
        const double phase = 0.7 * static_cast<double>(c);
        for (Eigen::Index i = 0; i < ni; ++i)
        {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
            raw(2 * i, c) = (c % 2 == 0) ? std::cos(freq * t + phase) : 0.3 * std::sin(freq * t + phase);
            raw(2 * i + 1, c) = (c % 2 == 0) ? 0.3 * std::sin(freq * t - phase) : std::cos(freq * t - phase);
        }
    }
    const Eigen::MatrixXd similarity = make_similarity_bases(base_shape);
    Eigen::MatrixXd modes = detail::orthonormalize_columns(raw, similarity);
    detail::require(modes.cols() >= k, ErrorKind::InvalidArgument, "too many modes for this landmark count");
    modes.conservativeResize(Eigen::NoChange, k);

    Eigen::VectorXd stddevs(k);
    for (Eigen::Index j = 0; j < k; ++j)
    {
        const double f = k > 1 ? static_cast<double>(j) / static_cast<double>(k - 1) : 0.0;
        stddevs[j] = stddev_max * std::pow(stddev_min / stddev_max, f);
    }
    GeneratorSpec spec{base_shape, modes, stddevs};
    spec.seed = seed;
    return spec;
}

struct TrainingCorpus
{
    std::vector<Shape> shapes;
    /// Descending eigenvalues of the sample covariance of the drawn mode coefficients, in the
    /// canonical (unit-norm) frame: the spectrum a PCA of this corpus should recover.
    Eigen::VectorXd spectrum;
    /// Generator variances in the canonical frame.
    Eigen::VectorXd nominal_spectrum;
};

/**
 * Emits count shapes: base + sum_j c_j mode_j with c_j ~ N(0, stddev_j^2),
 * each under a random similarity.
 */
inline TrainingCorpus make_training_shapes(const GeneratorSpec& spec, std::size_t count)
{
    detail::require(count >= 2, ErrorKind::InvalidArgument, "make_training_shapes needs count >= 2");
    detail::require(spec.modes.rows() == spec.base.coords().size() && spec.modes.cols() == spec.mode_stddevs.size(),
                    ErrorKind::DimensionMismatch, "generator modes do not match the base shape");
    Random rng(spec.seed);
    const Eigen::Index k = spec.modes.cols();
    const auto count_i = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd coefficients(count_i, k);
    TrainingCorpus corpus;
    corpus.shapes.reserve(count);
    for (Eigen::Index s = 0; s < count_i; ++s)
    {
        Eigen::VectorXd coords = spec.base.coords();
        for (Eigen::Index j = 0; j < k; ++j)
        {
            coefficients(s, j) = spec.mode_stddevs[j] * rng.normal();
            coords += coefficients(s, j) * spec.modes.col(j);
        }
        const double scale = 1.0 + rng.uniform(-spec.scale_jitter, spec.scale_jitter);
        const double angle = rng.uniform(-spec.rotation_jitter, spec.rotation_jitter);
        const Eigen::Vector2d t(rng.uniform(-spec.translation_jitter, spec.translation_jitter),
                                rng.uniform(-spec.translation_jitter, spec.translation_jitter));
        corpus.shapes.push_back(apply_similarity(SimilarityTransform(scale, angle, t), Shape(coords)));
    }

    const double base_norm2 = centered_coords(spec.base).squaredNorm();
    corpus.nominal_spectrum = spec.mode_stddevs.array().square() / base_norm2;
    if (k == 0)
    {
        corpus.spectrum = Eigen::VectorXd(0);
        return corpus;
    }
    const Eigen::MatrixXd centred = coefficients.rowwise() - coefficients.colwise().mean();
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(count_i - 1);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    corpus.spectrum = eig.eigenvalues().reverse() / base_norm2;
    return corpus;
}

/// Scenario side file: seed, occluded landmark indices and the pose.
inline std::string format_meta(const Scenario& scenario)
{
    std::string out = "seed: " + std::to_string(scenario.seed) + "\n";
    out += "n: " + std::to_string(scenario.truth.size()) + "\n";
    out += "occluded:";
    for (std::size_t i = 0; i < scenario.occluded.size(); ++i)
    {
        if (scenario.occluded[i])
        {
            out += " " + std::to_string(i);
        }
    }
    out += "\n";
    out += "pose_scale: " + detail::format_double(scenario.pose.scale()) + "\n";
    out += "pose_angle: " + detail::format_double(scenario.pose.angle()) + "\n";
    out += "pose_translation: " + detail::format_double(scenario.pose.translation().x()) + " " +
           detail::format_double(scenario.pose.translation().y()) + "\n";
    return out;
}

struct ScenarioMeta
{
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::vector<bool> occluded;
};

inline ScenarioMeta parse_meta(const std::string& text)
{
    ScenarioMeta meta;
    bool have_n = false;
    std::vector<std::size_t> hidden;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
    {
        const auto colon = line.find(':');
        if (colon == std::string::npos)
        {
            continue;
        }
        const std::string key(detail::trim(std::string_view(line).substr(0, colon)));
        std::istringstream rest(line.substr(colon + 1));
        if (key == "seed")
        {
            rest >> meta.seed;
        } else if (key == "n")
        {
            have_n = static_cast<bool>(rest >> meta.n);
        } else if (key == "occluded")
        {
            std::size_t i = 0;
            while (rest >> i)
            {
                hidden.push_back(i);
            }
        }
    }
    if (!have_n)
    {
        detail::fail(ErrorKind::Format, "meta: missing landmark count");
    }
    meta.occluded.assign(meta.n, false);
    for (const std::size_t i : hidden)
    {
        if (i >= meta.n)
        {
            detail::fail(ErrorKind::Format, "meta: occluded index out of range");
        }
        meta.occluded[i] = true;
    }
    return meta;
}

} /* namespace ect */

#endif /* ECT_SYNTH_HPP */
