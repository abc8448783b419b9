/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/response_io.hpp
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

#ifndef ECT_RESPONSE_IO_HPP
#define ECT_RESPONSE_IO_HPP

#include "ect/error.hpp"
#include "ect/pts_io.hpp"
#include "ect/response.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>

namespace ect {

inline constexpr std::uint32_t rspm_version = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v)
{
    for (int b = 0; b < 4; ++b)
    {
        out += static_cast<char>((v >> (8 * b)) & 0xffu);
    }
}

inline std::uint32_t get_u32(const std::string& in, std::size_t offset)
{
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
    {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + static_cast<std::size_t>(b)]))
             << (8 * b);
    }
    return v;
}

} /* namespace detail */

/**
 * Binary response stack, little-endian:
 * "RSPM", u32 version, u32 n, u32 height, u32 width, then n*height*width
 * float32 values, map-major then row-major.
 */
inline std::string encode_rspm(const ResponseStack& stack)
{
    std::string out = "RSPM";
    detail::put_u32(out, rspm_version);
    detail::put_u32(out, static_cast<std::uint32_t>(stack.size()));
    detail::put_u32(out, static_cast<std::uint32_t>(stack.height()));
    detail::put_u32(out, static_cast<std::uint32_t>(stack.width()));
    out.reserve(out.size() + 4 * stack.size() * static_cast<std::size_t>(stack.height() * stack.width()));
    for (const auto& map : stack.maps())
    {
        for (const float v : map.values())
        {
            detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
        }
    }
    return out;
}

inline ResponseStack decode_rspm(const std::string& bytes)
{
    constexpr std::size_t header = 20;
    if (bytes.size() < header || bytes.compare(0, 4, "RSPM") != 0)
    {
        detail::fail(ErrorKind::Format, "rspm: bad magic bytes");
    }
    const std::uint32_t version = detail::get_u32(bytes, 4);
    if (version != rspm_version)
    {
        detail::fail(ErrorKind::Format, "rspm: unsupported version " + std::to_string(version));
    }
    const std::uint64_t n = detail::get_u32(bytes, 8);
    const std::uint64_t h = detail::get_u32(bytes, 12);
    const std::uint64_t w = detail::get_u32(bytes, 16);
    if (n == 0 || h == 0 || w == 0 || h > (1u << 20) || w > (1u << 20))
    {
        detail::fail(ErrorKind::Format, "rspm: invalid dimensions");
    }
    const std::uint64_t count = n * h * w;
    if (bytes.size() != header + 4 * count)
    {
        detail::fail(ErrorKind::Format, "rspm: payload size does not match the header");
    }
    std::vector<ResponseMap> maps;
    maps.reserve(static_cast<std::size_t>(n));
    std::size_t offset = header;
    for (std::uint64_t i = 0; i < n; ++i)
    {
        std::vector<float> values(static_cast<std::size_t>(h * w));
        for (auto& v : values)
        {
            v = std::bit_cast<float>(detail::get_u32(bytes, offset));
            offset += 4;
        }
        try
        {
            maps.emplace_back(static_cast<int>(h), static_cast<int>(w), std::move(values));
        } catch (const Error& e)
        {
            detail::fail(ErrorKind::Format, std::string("rspm: ") + e.what());
        }
    }
    return ResponseStack(std::move(maps));
}

inline ResponseStack read_rspm(const std::filesystem::path& path)
{
    return decode_rspm(read_text_file(path));
}

} /* namespace ect */

#endif /* ECT_RESPONSE_IO_HPP */
