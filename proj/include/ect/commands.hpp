/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/commands.hpp
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

#ifndef ECT_COMMANDS_HPP
#define ECT_COMMANDS_HPP

#include "ect/atomic_file.hpp"
#include "ect/error.hpp"
#include "ect/fit_result_io.hpp"
#include "ect/fitter.hpp"
#include "ect/pdm.hpp"
#include "ect/pdm_io.hpp"
#include "ect/pts_io.hpp"
#include "ect/report.hpp"
#include "ect/response_io.hpp"
#include "ect/settings.hpp"
#include "ect/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

/*
 * Subcommand bodies of the ect tool. Each throws ect::Error on failure;
 * exit_code() turns the error kind into the tool's exit status.
 */

namespace ect::cli {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_format = 2;
inline constexpr int exit_insufficient = 3;
inline constexpr int exit_mismatch = 4;
inline constexpr int exit_init_degenerate = 5;

inline int exit_code(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::Format:
    case ErrorKind::Io: return exit_format;
    case ErrorKind::InsufficientData:
    case ErrorKind::AlignmentDegenerate: return exit_insufficient;
    case ErrorKind::DimensionMismatch: return exit_mismatch;
    case ErrorKind::InitDegenerate: return exit_init_degenerate;
    case ErrorKind::InvalidArgument:
    case ErrorKind::ZeroEvidence: return exit_usage;
    }
    return exit_usage;
}

/// Zero-padded four-digit index used in batch file names.
inline std::string padded(std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04zu", k);
    return buf;
}

/// Regular files with the given extension directly inside dir, sorted by path.
inline std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext)
{
    detail::require(fs::is_directory(dir), ErrorKind::Io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
    {
        if (entry.is_regular_file() && entry.path().extension() == ext)
        {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Subdirectories of dir that contain the named file, sorted by path.
inline std::vector<fs::path> scene_dirs(const fs::path& dir, const std::string& required)
{
    detail::require(fs::is_directory(dir), ErrorKind::Io, "not a directory: " + dir.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(dir))
    {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / required))
        {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    detail::require(!dirs.empty(), ErrorKind::InsufficientData,
                    "no scene directories with " + required + " under " + dir.string());
    return dirs;
}

inline void train_pdm_command(const fs::path& shape_dir, const fs::path& out_model, const Settings& settings,
                              std::ostream& log)
{
    const auto files = files_with_extension(shape_dir, ".pts");
    detail::require(files.size() >= 2, ErrorKind::InsufficientData,
                    "train-pdm needs at least 2 .pts files, found " + std::to_string(files.size()));
    std::vector<Shape> shapes;
    shapes.reserve(files.size());
    for (const auto& f : files)
    {
        try
        {
            shapes.push_back(read_pts(f));
        } catch (const Error& e)
        {
            detail::fail(e.kind(), f.string() + ": " + e.what());
        }
        if (shapes.back().size() != shapes.front().size())
        {
            detail::fail(ErrorKind::Format, f.string() + ": has " + std::to_string(shapes.back().size()) +
                                                " landmarks, expected " + std::to_string(shapes.front().size()));
        }
    }
    const auto model = train_pdm(shapes, settings.pdm);
    write_file_atomic(out_model, format_pdm(model));
    log << "n = " << model.num_landmarks() << ", m = " << model.num_modes()
        << ", retained variance = " << model.retained_variance() << "\n";
}

inline void synth_shapes_command(const fs::path& out_dir, std::size_t count, std::uint64_t seed,
                                 const Settings& settings, std::ostream& log)
{
    const auto& g = settings.generator;
    const auto spec = make_generator_spec(g.n, g.modes, g.rms_radius, g.stddev_max, g.stddev_min, seed);
    const auto corpus = make_training_shapes(spec, count);
    for (std::size_t k = 0; k < corpus.shapes.size(); ++k)
    {
        write_file_atomic(out_dir / ("shape_" + padded(k) + ".pts"), format_pts(corpus.shapes[k]));
    }
    log << "wrote " << corpus.shapes.size() << " training shapes (n = " << g.n << ") to " << out_dir.string()
        << "\n";
}

inline void write_scenario(const Scenario& scenario, const fs::path& dir)
{
    write_file_atomic(dir / "truth.pts", format_pts(scenario.truth));
    write_file_atomic(dir / "stack.rspm", encode_rspm(scenario.stack));
    write_file_atomic(dir / "meta", format_meta(scenario));
}

/// One scenario into out_dir, or count scenarios into out_dir/scene_NNNN with seeds seed, seed+1, ...
inline void synth_scenes_command(const fs::path& model_path, const fs::path& out_dir, std::size_t count,
                                 std::uint64_t seed, const Settings& settings, std::ostream& log)
{
    detail::require(count >= 1, ErrorKind::InvalidArgument, "synth: count must be >= 1");
    const auto model = read_pdm(model_path);
    ScenarioConfig cfg = settings.synth;
    cfg.validate();
    for (std::size_t k = 0; k < count; ++k)
    {
        cfg.seed = seed + k;
        const auto scenario = sample_scenario(model, cfg);
        write_scenario(scenario, count == 1 ? out_dir : out_dir / ("scene_" + padded(k)));
    }
    log << "wrote " << count << " scenario" << (count == 1 ? "" : "s") << " to " << out_dir.string() << "\n";
}

enum class FitFormat
{
    Json,
    Pts,
};

inline std::string render_fit(const FitResult& result, FitFormat format)
{
    return format == FitFormat::Json ? format_fit_result(result) : format_pts(result.shape);
}

inline void fit_command(const fs::path& model_path, const fs::path& stack_path, const fs::path& out_path,
                        FitFormat format, const Settings& settings, std::ostream& log)
{
    settings.fit.validate();
    const auto model = read_pdm(model_path);
    const auto stack = read_rspm(stack_path);
    const auto result = fit(model, stack, settings.fit);
    write_file_atomic(out_path, render_fit(result, format));
    const auto flagged = std::count(result.occluded.begin(), result.occluded.end(), true);
    log << "fitted " << result.shape.size() << " landmarks in " << result.trace.size() << " iterations, "
        << flagged << " flagged occluded\n";
}

/// Fits scenes_dir/*/stack.rspm, writing the named result next to each stack.
inline void fit_batch_command(const fs::path& model_path, const fs::path& scenes_dir, const std::string& out_name,
                              FitFormat format, const Settings& settings, std::ostream& log)
{
    settings.fit.validate();
    const auto model = read_pdm(model_path);
    const auto dirs = scene_dirs(scenes_dir, "stack.rspm");
    std::size_t iterations = 0;
    for (const auto& dir : dirs)
    {
        try
        {
            const auto result = fit(model, read_rspm(dir / "stack.rspm"), settings.fit);
            write_file_atomic(dir / out_name, render_fit(result, format));
            iterations += result.trace.size();
        } catch (const Error& e)
        {
            detail::fail(e.kind(), dir.string() + ": " + e.what());
        }
    }
    log << "fitted " << dirs.size() << " scenes, " << iterations << " tuning iterations in total\n";
}

/// A prediction file: fit result document or plain pts.
inline FitSummary read_prediction(const fs::path& path)
{
    const std::string text = read_text_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
    {
        return parse_fit_result(text);
    }
    return FitSummary{parse_pts(text), {}, {}};
}

inline EvalSample load_sample(const std::string& name, const fs::path& pred_path, const fs::path& truth_path,
                              const std::optional<fs::path>& meta_path)
{
    try
    {
        auto pred = read_prediction(pred_path);
        EvalSample sample{name, std::move(pred.shape), read_pts(truth_path), {}, std::move(pred.weights)};
        detail::require(sample.pred.size() == sample.truth.size(), ErrorKind::DimensionMismatch,
                        "prediction has " + std::to_string(sample.pred.size()) + " landmarks, truth has " +
                            std::to_string(sample.truth.size()));
        if (meta_path)
        {
            const auto meta = parse_meta(read_text_file(*meta_path));
            detail::require(meta.n == sample.truth.size(), ErrorKind::DimensionMismatch,
                            "meta landmark count does not match the truth");
            sample.occluded = meta.occluded;
        }
        return sample;
    } catch (const Error& e)
    {
        detail::fail(e.kind(), name + ": " + e.what());
    }
}

inline EvalReport write_report(const std::vector<EvalSample>& samples, const fs::path& report_path,
                               const std::optional<fs::path>& ced_path, const Settings& settings, std::ostream& log)
{
    const auto report = build_eval_report(samples, settings.eval);
    write_file_atomic(report_path, format_eval_report(report, settings.eval));
    if (ced_path)
    {
        write_file_atomic(*ced_path, format_ced_table(report.ced));
    }
    log << samples.size() << " image" << (samples.size() == 1 ? "" : "s") << ": mean NME "
        << detail::format_double(report.mean_nme) << " (" << report.normalizer << "), MAPE "
        << detail::format_double(report.mean_mape_px) << " px, AUC " << detail::format_double(report.ced.auc)
        << ", failure rate " << detail::format_double(report.ced.failure_rate) << "\n";
    return report;
}

inline void eval_pair_command(const fs::path& pred, const fs::path& truth, const std::optional<fs::path>& meta,
                              const fs::path& report_path, const std::optional<fs::path>& ced_path,
                              const Settings& settings, std::ostream& log)
{
    write_report({load_sample(pred.string(), pred, truth, meta)}, report_path, ced_path, settings, log);
}

/// Scores every scenes_dir/*/ holding truth.pts and the named prediction; meta is used when present.
inline void eval_batch_command(const fs::path& scenes_dir, const std::string& pred_name, const fs::path& report_path,
                               const std::optional<fs::path>& ced_path, const Settings& settings, std::ostream& log)
{
    std::vector<EvalSample> samples;
    for (const auto& dir : scene_dirs(scenes_dir, pred_name))
    {
        const fs::path meta = dir / "meta";
        samples.push_back(load_sample(dir.filename().string(), dir / pred_name, dir / "truth.pts",
                                      fs::is_regular_file(meta) ? std::optional<fs::path>(meta) : std::nullopt));
    }
    write_report(samples, report_path, ced_path, settings, log);
}

} /* namespace ect::cli */

#endif /* ECT_COMMANDS_HPP */
