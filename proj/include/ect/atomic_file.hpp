/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/atomic_file.hpp
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

#ifndef ECT_ATOMIC_FILE_HPP
#define ECT_ATOMIC_FILE_HPP

#include "ect/error.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>

namespace ect {

/**
 * Writes bytes to a sibling temporary file and renames it over the target,
 * so readers never observe a partially written file.
 */
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes)
{
    namespace fs = std::filesystem;
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(parent, ec);
    const fs::path tmp = parent / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            detail::fail(ErrorKind::Io, "cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out)
        {
            fs::remove(tmp, ec);
            detail::fail(ErrorKind::Io, "write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec)
    {
        fs::remove(tmp, ec);
        detail::fail(ErrorKind::Io, "cannot rename onto " + path.string());
    }
}

} /* namespace ect */

#endif /* ECT_ATOMIC_FILE_HPP */
