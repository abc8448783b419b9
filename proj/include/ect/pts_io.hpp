/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/pts_io.hpp
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

#ifndef ECT_PTS_IO_HPP
#define ECT_PTS_IO_HPP

#include "ect/error.hpp"
#include "ect/shape.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ect {

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view token)
{
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end)
    {
        fail(ErrorKind::Format, "not a number: '" + std::string(token) + "'");
    }
    return value;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

} /* namespace detail */

/**
 * Parses the pts landmark format (an optional leading "version: 1" line is skipped):
 *
 *     n_points: <n>
 *     {
 *     <x> <y>        (n lines)
 *     }
 */
inline Shape parse_pts(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
    {
        const auto t = detail::trim(line);
        if (!t.empty())
        {
            lines.emplace_back(t);
        }
    }
    if (!lines.empty() && lines.front().rfind("version:", 0) == 0)
    {
        lines.erase(lines.begin());
    }
    if (lines.size() < 3)
    {
        detail::fail(ErrorKind::Format, "pts: truncated document");
    }
    const std::string_view header = lines[0];
    constexpr std::string_view key = "n_points:";
    if (header.substr(0, key.size()) != key)
    {
        detail::fail(ErrorKind::Format, "pts: first line must be 'n_points: <n>'");
    }
    const auto count_text = detail::trim(header.substr(key.size()));
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), n);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size())
    {
        detail::fail(ErrorKind::Format, "pts: bad landmark count");
    }
    if (lines[1] != "{" || lines.size() != n + 3 || lines.back() != "}")
    {
        detail::fail(ErrorKind::Format, "pts: expected '{', " + std::to_string(n) + " coordinate lines, '}'");
    }
    std::vector<Eigen::Vector2d> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::string_view row = lines[i + 2];
        const auto split = row.find_first_of(" \t");
        if (split == std::string_view::npos)
        {
            detail::fail(ErrorKind::Format, "pts: expected '<x> <y>' on line " + std::to_string(i + 3));
        }
        const double x = detail::parse_double(detail::trim(row.substr(0, split)));
        const double y = detail::parse_double(detail::trim(row.substr(split + 1)));
        points.emplace_back(x, y);
    }
    try
    {
        return Shape::from_points(points);
    } catch (const Error& e)
    {
        detail::fail(ErrorKind::Format, std::string("pts: ") + e.what());
    }
}

inline std::string format_pts(const Shape& shape)
{
    std::string out = "n_points: " + std::to_string(shape.size()) + "\n{\n";
    for (std::size_t i = 0; i < shape.size(); ++i)
    {
        const auto p = shape.point(i);
        out += detail::format_double(p.x());
        out += ' ';
        out += detail::format_double(p.y());
        out += '\n';
    }
    out += "}\n";
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        detail::fail(ErrorKind::Io, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Shape read_pts(const std::filesystem::path& path)
{
    return parse_pts(read_text_file(path));
}

} /* namespace ect */

#endif /* ECT_PTS_IO_HPP */
