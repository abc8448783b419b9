/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/fit_result_io.hpp
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

#ifndef ECT_FIT_RESULT_IO_HPP
#define ECT_FIT_RESULT_IO_HPP

#include "ect/error.hpp"
#include "ect/fitter.hpp"
#include "ect/pts_io.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace ect {

namespace detail {

inline nlohmann::json to_json_array(const Eigen::VectorXd& v)
{
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        a.push_back(v[i]);
    }
    return a;
}

} /* namespace detail */

/**
 * Fit result document (JSON). The final shape is embedded verbatim in pts
 * form under "shape_pts"; the trace lists one record per tuning iteration.
 */
inline std::string format_fit_result(const FitResult& result)
{
    nlohmann::json doc;
    doc["format"] = "ect-fit";
    doc["version"] = 1;
    doc["n"] = result.shape.size();
    doc["shape_pts"] = format_pts(result.shape);
    doc["params"] = detail::to_json_array(result.params.values);
    doc["weights"] = result.weights;
    std::vector<int> flags;
    for (const bool f : result.occluded)
    {
        flags.push_back(f ? 1 : 0);
    }
    doc["occlusion_flags"] = flags;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& it : result.trace)
    {
        trace.push_back({{"patch_size", it.patch_size},
                         {"step_norm", it.step_norm},
                         {"shape_change", it.shape_change},
                         {"surrogate", it.surrogate},
                         {"shape", detail::to_json_array(it.shape.coords())}});
    }
    doc["trace"] = trace;
    return doc.dump(2) + "\n";
}

/// The parts of a fit document needed for evaluation.
struct FitSummary
{
    Shape shape;
    std::vector<double> weights;
    std::vector<bool> occluded;
};

inline FitSummary parse_fit_result(const std::string& text)
{
    try
    {
        const auto doc = nlohmann::json::parse(text);
        if (doc.value("format", std::string()) != "ect-fit" || doc.value("version", 0) != 1)
        {
            detail::fail(ErrorKind::Format, "fit result: missing or unsupported format tag");
        }
        Shape shape = parse_pts(doc.at("shape_pts").get<std::string>());
        auto weights = doc.at("weights").get<std::vector<double>>();
        std::vector<bool> occluded;
        for (const int f : doc.at("occlusion_flags").get<std::vector<int>>())
        {
            occluded.push_back(f != 0);
        }
        if (weights.size() != shape.size() || occluded.size() != shape.size())
        {
            detail::fail(ErrorKind::Format, "fit result: weights or flags do not match the landmark count");
        }
        return {std::move(shape), std::move(weights), std::move(occluded)};
    } catch (const nlohmann::json::exception& e)
    {
        detail::fail(ErrorKind::Format, std::string("fit result: ") + e.what());
    }
}

} /* namespace ect */

#endif /* ECT_FIT_RESULT_IO_HPP */
