#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repmech {

enum class ErrorKind {
    NoBracket,
    NoRoot,
    DimensionMismatch,
    ZeroTotalQuality,
    TooFewAgents,
    ZeroWeightSum,
    InvalidArgument,
    UnsupportedCombination,
    CliqueTooLarge,
    ConfigInvalid,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroTotalQuality: return "ZeroTotalQuality";
    case ErrorKind::TooFewAgents: return "TooFewAgents";
    case ErrorKind::ZeroWeightSum: return "ZeroWeightSum";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorKind::CliqueTooLarge: return "CliqueTooLarge";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

} // namespace repmech
