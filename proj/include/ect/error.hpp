/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/error.hpp
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

#ifndef ECT_ERROR_HPP
#define ECT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ect {

/**
 * Category of a library failure. The command-line tool maps these onto its
 * fixed exit codes, so new kinds must be added there as well.
 */
enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    AlignmentDegenerate,
    InsufficientData,
    InitDegenerate,
    ZeroEvidence,
    Format,
    Io
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind)
    {
    case ErrorKind::InvalidArgument:
        return "invalid argument";
    case ErrorKind::DimensionMismatch:
        return "dimension mismatch";
    case ErrorKind::AlignmentDegenerate:
        return "alignment degenerate";
    case ErrorKind::InsufficientData:
        return "insufficient data";
    case ErrorKind::InitDegenerate:
        return "initialization degenerate";
    case ErrorKind::ZeroEvidence:
        return "zero evidence";
    case ErrorKind::Format:
        return "format error";
    case ErrorKind::Io:
        return "i/o error";
    }
    return "unknown";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const char* what)
{
    if (!condition)
    {
        throw Error(kind, what);
    }
}

inline void require(bool condition, ErrorKind kind, const std::string& what)
{
    if (!condition)
    {
        throw Error(kind, what);
    }
}

} /* namespace detail */
} /* namespace ect */

#endif /* ECT_ERROR_HPP */
