/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/report.hpp
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

#ifndef ECT_REPORT_HPP
#define ECT_REPORT_HPP

#include "ect/error.hpp"
#include "ect/metrics.hpp"
#include "ect/pts_io.hpp"
#include "ect/settings.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ect {

/// One evaluated image: prediction, ground truth and optional occlusion data.
struct EvalSample
{
    std::string name;
    Shape pred;
    Shape truth;
    std::vector<bool> occluded;  ///< ground-truth occlusion; empty when unknown
    std::vector<double> weights; ///< predicted confidences; empty when unavailable
};

struct EvalReport
{
    std::vector<std::string> names;
    std::vector<double> nme;     ///< per image
    std::vector<double> mape_px; ///< per image
    double mean_nme = 0.0;
    double mean_mape_px = 0.0;
    CedCurve ced;
    std::string normalizer;
    std::optional<PrecisionRecall> occlusion;    ///< at the configured threshold
    std::optional<OcclusionReport> occlusion_sweep;
};

inline double normalizer_for(const Shape& truth, const EvalOptions& options)
{
    switch (options.normalizer)
    {
    case Normalizer::BoundingBox: return bbox_size(truth);
    case Normalizer::InterOcular: return inter_ocular_distance(truth, options.ocular_left, options.ocular_right);
    case Normalizer::InterPupil: return inter_pupil_distance(truth, options.left_eye, options.right_eye);
    case Normalizer::Pixels: return 1.0;
    }
    return 1.0;
}

/**
 * Scores the samples: errors use visible landmarks only; occlusion
 * precision/recall pools every sample that carries both weights and truth.
 */
inline EvalReport build_eval_report(const std::vector<EvalSample>& samples, const EvalOptions& options)
{
    detail::require(!samples.empty(), ErrorKind::InsufficientData, "eval: no samples");
    EvalReport report;
    report.normalizer = to_string(options.normalizer);
    std::vector<double> pooled_weights;
    std::vector<bool> pooled_truth;
    for (const auto& s : samples)
    {
        std::vector<bool> visible;
        if (!s.occluded.empty())
        {
            detail::require(s.occluded.size() == s.truth.size(), ErrorKind::DimensionMismatch,
                            "eval: occlusion list does not match " + s.name);
            visible.resize(s.occluded.size());
            for (std::size_t i = 0; i < visible.size(); ++i)
            {
                visible[i] = !s.occluded[i];
            }
        }
        report.names.push_back(s.name);
        report.nme.push_back(nme(s.pred, s.truth, normalizer_for(s.truth, options), visible));
        report.mape_px.push_back(mean_pixel_error(s.pred, s.truth, visible));
        if (!s.weights.empty() && !s.occluded.empty())
        {
            detail::require(s.weights.size() == s.truth.size(), ErrorKind::DimensionMismatch,
                            "eval: weight count does not match " + s.name);
            pooled_weights.insert(pooled_weights.end(), s.weights.begin(), s.weights.end());
            pooled_truth.insert(pooled_truth.end(), s.occluded.begin(), s.occluded.end());
        }
    }
    double total = 0.0;
    double total_px = 0.0;
    for (std::size_t k = 0; k < report.nme.size(); ++k)
    {
        total += report.nme[k];
        total_px += report.mape_px[k];
    }
    report.mean_nme = total / static_cast<double>(report.nme.size());
    report.mean_mape_px = total_px / static_cast<double>(report.nme.size());
    report.ced = ced_auc(report.nme, options.cutoff, options.ced_samples);
    if (!pooled_weights.empty())
    {
        report.occlusion = occlusion_precision_recall(pooled_weights, pooled_truth, options.occlusion_threshold);
        report.occlusion_sweep = occlusion_pr(pooled_weights, pooled_truth, uniform_thresholds());
    }
    return report;
}

inline std::string format_eval_report(const EvalReport& report, const EvalOptions& options)
{
    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
    nlohmann::json doc;
    doc["format"] = "ect-eval";
    doc["version"] = 1;
    doc["normalizer"] = report.normalizer;
    doc["count"] = report.nme.size();
    doc["mean_nme"] = report.mean_nme;
    doc["mape_px"] = report.mean_mape_px;
    doc["cutoff"] = options.cutoff;
    doc["auc"] = report.ced.auc;
    doc["failure_rate"] = report.ced.failure_rate;
    nlohmann::json images = nlohmann::json::array();
    for (std::size_t k = 0; k < report.nme.size(); ++k)
    {
        images.push_back({{"name", report.names[k]}, {"nme", report.nme[k]}, {"mape_px", report.mape_px[k]}});
    }
    doc["images"] = images;
    if (report.occlusion)
    {
        doc["occlusion"] = {{"threshold", report.occlusion->threshold},
                            {"precision", opt(report.occlusion->precision)},
                            {"recall", opt(report.occlusion->recall)},
                            {"recall_at_precision80", opt(report.occlusion_sweep->recall_at_precision80)},
                            {"threshold_at_precision80", opt(report.occlusion_sweep->threshold_at_precision80)}};
    } else
    {
        doc["occlusion"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

/// Two tab-separated columns: threshold, cumulative fraction.
inline std::string format_ced_table(const CedCurve& ced)
{
    std::string out = "threshold\tfraction\n";
    for (std::size_t k = 0; k < ced.thresholds.size(); ++k)
    {
        out += detail::format_double(ced.thresholds[k]) + "\t" + detail::format_double(ced.fractions[k]) + "\n";
    }
    return out;
}

} /* namespace ect */

#endif /* ECT_REPORT_HPP */
