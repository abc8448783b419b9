/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/settings.hpp
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

#ifndef ECT_SETTINGS_HPP
#define ECT_SETTINGS_HPP

#include "ect/error.hpp"
#include "ect/fitter.hpp"
#include "ect/pdm.hpp"
#include "ect/pts_io.hpp"
#include "ect/synth.hpp"

#include <charconv>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ect {

/// Face-size normaliser used by evaluation.
enum class Normalizer
{
    BoundingBox,
    InterOcular,
    InterPupil,
    Pixels,
};

inline std::string to_string(Normalizer n)
{
    switch (n)
    {
    case Normalizer::BoundingBox: return "bbox";
    case Normalizer::InterOcular: return "inter-ocular";
    case Normalizer::InterPupil: return "inter-pupil";
    case Normalizer::Pixels: return "pixels";
    }
    return "bbox";
}

struct EvalOptions
{
    double cutoff = 0.08;
    std::size_t ced_samples = 1000;
    Normalizer normalizer = Normalizer::BoundingBox;
    /// Outer eye corners of the 68-point scheme (0-based).
    std::size_t ocular_left = 36;
    std::size_t ocular_right = 45;
    std::vector<std::size_t> left_eye{36, 37, 38, 39, 40, 41};
    std::vector<std::size_t> right_eye{42, 43, 44, 45, 46, 47};
    /// Confidence below this marks a landmark occluded in the report.
    double occlusion_threshold = 0.5;
};

/// Parameters of the synthetic training-shape generator.
struct GeneratorOptions
{
    std::size_t n = 68;
    Eigen::Index modes = 10;
    double rms_radius = 45.0;
    double stddev_max = 25.0;
    double stddev_min = 8.0;
};

/**
 * Every tunable default of the command-line front end, addressable as
 * "section.key" for overrides and dumps.
 */
struct Settings
{
    FitConfig fit;
    ScenarioConfig synth;
    PdmTrainOptions pdm;
    EvalOptions eval;
    GeneratorOptions generator;
};

namespace detail {

inline long long parse_integer(std::string_view text)
{
    const auto t = trim(text);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    {
        fail(ErrorKind::InvalidArgument, "not an integer: '" + std::string(text) + "'");
    }
    return value;
}

inline std::size_t parse_count(std::string_view text)
{
    const long long v = parse_integer(text);
    require(v >= 0, ErrorKind::InvalidArgument, "expected a non-negative integer: '" + std::string(text) + "'");
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(std::string_view text)
{
    const auto t = trim(text);
    if (t == "true" || t == "1")
    {
        return true;
    }
    if (t == "false" || t == "0")
    {
        return false;
    }
    fail(ErrorKind::InvalidArgument, "not a boolean: '" + std::string(text) + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view text, Parse parse)
{
    std::vector<T> out;
    std::size_t start = 0;
    while (start <= text.size())
    {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string_view::npos ? text.size() : comma;
        out.push_back(static_cast<T>(parse(text.substr(start, end - start))));
        if (comma == std::string_view::npos)
        {
            break;
        }
        start = comma + 1;
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        out += (i ? "," : "") + std::to_string(values[i]);
    }
    return out;
}

inline Normalizer parse_normalizer(std::string_view text)
{
    const auto t = trim(text);
    for (const Normalizer n : {Normalizer::BoundingBox, Normalizer::InterOcular, Normalizer::InterPupil,
                               Normalizer::Pixels})
    {
        if (t == to_string(n))
        {
            return n;
        }
    }
    fail(ErrorKind::InvalidArgument, "unknown normaliser '" + std::string(text) + "'");
}

struct SettingEntry
{
    const char* key;
    const char* help;
    std::function<void(Settings&, std::string_view)> set;
    std::function<std::string(const Settings&)> get;
};

#define ECT_REAL(KEY, FIELD, HELP)                                                                                   \
    SettingEntry                                                                                                     \
    {                                                                                                                \
        KEY, HELP, [](Settings& s, std::string_view v) { s.FIELD = parse_double(trim(v)); },                        \
            [](const Settings& s) { return format_double(static_cast<double>(s.FIELD)); }                           \
    }
#define ECT_INT(KEY, FIELD, TYPE, HELP)                                                                              \
    SettingEntry                                                                                                     \
    {                                                                                                                \
        KEY, HELP, [](Settings& s, std::string_view v) { s.FIELD = static_cast<TYPE>(parse_integer(v)); },          \
            [](const Settings& s) { return std::to_string(s.FIELD); }                                               \
    }

/// The single table of configurable values.
inline const std::vector<SettingEntry>& setting_table()
{
    static const std::vector<SettingEntry> table{
        ECT_INT("fit.max_iterations", fit.max_iterations, int, "tuning iterations K"),
        SettingEntry{"fit.patch_sizes", "odd patch side per tuning iteration, comma separated",
                     [](Settings& s, std::string_view v) {
                         s.fit.patch_sizes = parse_list<int>(v, [](std::string_view t) { return parse_integer(t); });
                     },
                     [](const Settings& s) { return join(s.fit.patch_sizes); }},
        ECT_REAL("fit.rho", fit.rho, "kernel bandwidth rho, pixels"),
        ECT_REAL("fit.gamma", fit.gamma, "prior weight of the correction step"),
        ECT_REAL("fit.a", fit.a, "confidence sigmoid slope"),
        ECT_REAL("fit.b", fit.b, "confidence sigmoid offset"),
        ECT_REAL("fit.w_min", fit.w_min, "lower confidence clamp"),
        ECT_REAL("fit.w_max", fit.w_max, "upper confidence clamp"),
        ECT_REAL("fit.converge_tol", fit.converge_tol, "mean landmark move (px) that stops tuning"),
        ECT_REAL("fit.occlusion_threshold", fit.occlusion_threshold, "confidence below which a landmark is flagged"),
        SettingEntry{"fit.uniform_weights", "force every confidence to 1 (plain RLMS)",
                     [](Settings& s, std::string_view v) { s.fit.uniform_weights = parse_bool(v); },
                     [](const Settings& s) { return std::string(s.fit.uniform_weights ? "true" : "false"); }},
        ECT_INT("synth.height", synth.height, int, "canvas height, pixels"),
        ECT_INT("synth.width", synth.width, int, "canvas width, pixels"),
        ECT_REAL("synth.sigma", synth.sigma, "ideal response spread, pixels"),
        ECT_REAL("synth.noise_amplitude", synth.noise_amplitude, "uniform noise amplitude as a fraction of the peak"),
        ECT_REAL("synth.occluded_fraction", synth.occluded_fraction, "fraction of maps zeroed"),
        ECT_REAL("synth.rms_radius_min", synth.pose.rms_radius_min, "smallest face rms radius, pixels"),
        ECT_REAL("synth.rms_radius_max", synth.pose.rms_radius_max, "largest face rms radius, pixels"),
        ECT_REAL("synth.rotation_max", synth.pose.rotation_max, "pose rotation range, radians"),
        ECT_REAL("synth.translation_max", synth.pose.translation_max, "centroid offset range, pixels"),
        ECT_REAL("synth.mode_scale", synth.mode_scale, "mode coefficient range in standard deviations"),
        ECT_INT("synth.max_retries", synth.max_retries, int, "pose redraws before giving up"),
        ECT_REAL("pdm.variance_retained", pdm.variance_retained, "variance fraction kept by PCA"),
        SettingEntry{"pdm.component_count", "fixed mode count (0 = use variance_retained)",
                     [](Settings& s, std::string_view v) {
                         const auto m = parse_count(v);
                         s.pdm.component_count =
                             m == 0 ? std::nullopt : std::optional<Eigen::Index>(static_cast<Eigen::Index>(m));
                     },
                     [](const Settings& s) {
                         return std::to_string(s.pdm.component_count ? *s.pdm.component_count : 0);
                     }},
        ECT_INT("pdm.procrustes_max_iters", pdm.procrustes_max_iters, int, "Procrustes iteration cap"),
        ECT_REAL("pdm.procrustes_tol", pdm.procrustes_tol, "Procrustes mean-change tolerance"),
        ECT_REAL("eval.cutoff", eval.cutoff, "CED cutoff / failure threshold (normalised error)"),
        ECT_INT("eval.ced_samples", eval.ced_samples, std::size_t, "CED grid size"),
        SettingEntry{"eval.normalizer", "bbox | inter-ocular | inter-pupil | pixels",
                     [](Settings& s, std::string_view v) { s.eval.normalizer = parse_normalizer(v); },
                     [](const Settings& s) { return to_string(s.eval.normalizer); }},
        ECT_INT("eval.ocular_left", eval.ocular_left, std::size_t, "left outer eye corner index"),
        ECT_INT("eval.ocular_right", eval.ocular_right, std::size_t, "right outer eye corner index"),
        SettingEntry{"eval.left_eye", "left eye landmark indices, comma separated",
                     [](Settings& s, std::string_view v) { s.eval.left_eye = parse_list<std::size_t>(v, parse_count); },
                     [](const Settings& s) { return join(s.eval.left_eye); }},
        SettingEntry{"eval.right_eye", "right eye landmark indices, comma separated",
                     [](Settings& s, std::string_view v) {
                         s.eval.right_eye = parse_list<std::size_t>(v, parse_count);
                     },
                     [](const Settings& s) { return join(s.eval.right_eye); }},
        ECT_REAL("eval.occlusion_threshold", eval.occlusion_threshold, "confidence threshold for the reported P/R"),
        ECT_INT("generator.n", generator.n, std::size_t, "landmarks per generated training shape"),
        ECT_INT("generator.modes", generator.modes, Eigen::Index, "deformation modes of the generator"),
        ECT_REAL("generator.rms_radius", generator.rms_radius, "base shape rms radius, pixels"),
        ECT_REAL("generator.stddev_max", generator.stddev_max, "largest mode standard deviation, pixels"),
        ECT_REAL("generator.stddev_min", generator.stddev_min, "smallest mode standard deviation, pixels"),
    };
    return table;
}

#undef ECT_REAL
#undef ECT_INT

} /* namespace detail */

/// Applies one "section.key=value" override; unknown keys are rejected.
inline void apply_override(Settings& settings, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    detail::require(eq != std::string_view::npos, ErrorKind::InvalidArgument,
                    "override must look like key=value: '" + std::string(assignment) + "'");
    const auto key = detail::trim(assignment.substr(0, eq));
    for (const auto& entry : detail::setting_table())
    {
        if (key == entry.key)
        {
            try
            {
                entry.set(settings, assignment.substr(eq + 1));
            } catch (const Error& e)
            {
                detail::fail(ErrorKind::InvalidArgument, std::string(key) + ": " + e.what());
            }
            return;
        }
    }
    detail::fail(ErrorKind::InvalidArgument, "unknown setting '" + std::string(key) + "'");
}

/// One "key = value  # help" line per setting, in table order.
inline std::string dump_settings(const Settings& settings)
{
    std::string out;
    for (const auto& entry : detail::setting_table())
    {
        out += std::string(entry.key) + " = " + entry.get(settings) + "  # " + entry.help + "\n";
    }
    return out;
}

} /* namespace ect */

#endif /* ECT_SETTINGS_HPP */
