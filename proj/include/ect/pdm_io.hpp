/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/pdm_io.hpp
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

#ifndef ECT_PDM_IO_HPP
#define ECT_PDM_IO_HPP

#include "ect/error.hpp"
#include "ect/pdm.hpp"
#include "ect/pts_io.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

namespace ect {

inline constexpr int pdm_format_version = 1;

namespace detail {

inline std::string json_number17(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline std::string json_array17(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        if (i)
        {
            out += ", ";
        }
        out += json_number17(v[i]);
    }
    out += "]";
    return out;
}

inline std::string json_columns17(const Eigen::MatrixXd& m)
{
    std::string out = "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c)
    {
        out += c ? ",\n    " : "\n    ";
        out += json_array17(m.col(c));
    }
    out += m.cols() ? "\n  ]" : "]";
    return out;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index expected, const char* what)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected)
    {
        fail(ErrorKind::Format, std::string("pdm: '") + what + "' has the wrong length");
    }
    Eigen::VectorXd v(expected);
    for (Eigen::Index i = 0; i < expected; ++i)
    {
        const auto& e = j[static_cast<std::size_t>(i)];
        if (!e.is_number())
        {
            fail(ErrorKind::Format, std::string("pdm: '") + what + "' must hold numbers");
        }
        v[i] = e.get<double>();
    }
    return v;
}

inline Eigen::MatrixXd columns_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                                         const char* what)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != cols)
    {
        fail(ErrorKind::Format, std::string("pdm: '") + what + "' has the wrong column count");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
    {
        m.col(c) = vector_from_json(j[static_cast<std::size_t>(c)], rows, what);
    }
    return m;
}

} /* namespace detail */

/**
 * Model document: a JSON object with the format tag, version, sizes and the
 * numeric arrays. Bases are stored column by column. Every number carries
 * 17 significant digits so that a reload is bit-exact.
 */
inline std::string format_pdm(const PointDistributionModel& model)
{
    std::string out = "{\n";
    out += "  \"format\": \"ect-pdm\",\n";
    out += "  \"version\": " + std::to_string(pdm_format_version) + ",\n";
    out += "  \"n\": " + std::to_string(model.num_landmarks()) + ",\n";
    out += "  \"m\": " + std::to_string(model.num_modes()) + ",\n";
    out += "  \"reference_scale\": " + detail::json_number17(model.reference_scale()) + ",\n";
    out += "  \"retained_variance\": " + detail::json_number17(model.retained_variance()) + ",\n";
    out += "  \"mean_shape\": " + detail::json_array17(model.mean_shape().coords()) + ",\n";
    out += "  \"similarity_bases\": " + detail::json_columns17(model.similarity_bases()) + ",\n";
    out += "  \"components\": " + detail::json_columns17(model.components()) + ",\n";
    out += "  \"eigenvalues\": " + detail::json_array17(model.eigenvalues()) + "\n";
    out += "}\n";
    return out;
}

inline PointDistributionModel parse_pdm(const std::string& text)
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e)
    {
        detail::fail(ErrorKind::Format, std::string("pdm: not a JSON document: ") + e.what());
    }
    try
    {
        if (!doc.is_object() || doc.value("format", std::string()) != "ect-pdm")
        {
            detail::fail(ErrorKind::Format, "pdm: missing or wrong format tag");
        }
        const int version = doc.at("version").get<int>();
        if (version != pdm_format_version)
        {
            detail::fail(ErrorKind::Format, "pdm: unsupported format version " + std::to_string(version));
        }
        const auto n = doc.at("n").get<Eigen::Index>();
        const auto m = doc.at("m").get<Eigen::Index>();
        if (n < 3 || m < 0 || m > 2 * n - num_similarity_params)
        {
            detail::fail(ErrorKind::Format, "pdm: invalid sizes");
        }
        const Eigen::Index dim = 2 * n;
        Shape mean(detail::vector_from_json(doc.at("mean_shape"), dim, "mean_shape"));
        Eigen::MatrixXd similarity =
            detail::columns_from_json(doc.at("similarity_bases"), dim, num_similarity_params, "similarity_bases");
        Eigen::MatrixXd components = detail::columns_from_json(doc.at("components"), dim, m, "components");
        Eigen::VectorXd eigenvalues = detail::vector_from_json(doc.at("eigenvalues"), m, "eigenvalues");
        return PointDistributionModel(std::move(mean), std::move(similarity), std::move(components),
                                      std::move(eigenvalues), doc.at("reference_scale").get<double>(),
                                      doc.value("retained_variance", 1.0));
    } catch (const nlohmann::json::exception& e)
    {
        detail::fail(ErrorKind::Format, std::string("pdm: ") + e.what());
    } catch (const Error& e)
    {
        if (e.kind() == ErrorKind::Format)
        {
            throw;
        }
        detail::fail(ErrorKind::Format, std::string("pdm: ") + e.what());
    }
}

inline PointDistributionModel read_pdm(const std::filesystem::path& path)
{
    return parse_pdm(read_text_file(path));
}

} /* namespace ect */

#endif /* ECT_PDM_IO_HPP */
