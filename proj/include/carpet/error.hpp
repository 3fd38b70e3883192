// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carpet {

enum class ErrorKind {
    BaseOrder,
    DigitRange,
    NoFullColumn,
    EmptyDigits,
    InvalidDigit,
    DepthZero,
    DepthTooShallow,
    SlopeTooLarge,
    EmptyIntersection,
    EmptyInput,
    NotConverged,
    StageStuck,
    CertificateViolation,
    Parse,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::BaseOrder: return "BaseOrder";
    case ErrorKind::DigitRange: return "DigitRange";
    case ErrorKind::NoFullColumn: return "NoFullColumn";
    case ErrorKind::EmptyDigits: return "EmptyDigits";
    case ErrorKind::InvalidDigit: return "InvalidDigit";
    case ErrorKind::DepthZero: return "DepthZero";
    case ErrorKind::DepthTooShallow: return "DepthTooShallow";
    case ErrorKind::SlopeTooLarge: return "SlopeTooLarge";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::StageStuck: return "StageStuck";
    case ErrorKind::CertificateViolation: return "CertificateViolation";
    case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace carpet
