#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvqn {

enum class ErrorKind {
    InvalidVariance,
    InvalidCovariance,
    UnphysicalEigenvalue,
    IndexError,
    UnphysicalChannel,
    InvalidParameter,
    BlockTooSmall,
    InfiniteCapacity,
    ChannelInverted,
    InvalidRange,
    ParseError,
    IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidVariance: return "InvalidVariance";
        case ErrorKind::InvalidCovariance: return "InvalidCovariance";
        case ErrorKind::UnphysicalEigenvalue: return "UnphysicalEigenvalue";
        case ErrorKind::IndexError: return "IndexError";
        case ErrorKind::UnphysicalChannel: return "UnphysicalChannel";
        case ErrorKind::InvalidParameter: return "InvalidParameter";
        case ErrorKind::BlockTooSmall: return "BlockTooSmall";
        case ErrorKind::InfiniteCapacity: return "InfiniteCapacity";
        case ErrorKind::ChannelInverted: return "ChannelInverted";
        case ErrorKind::InvalidRange: return "InvalidRange";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

// Process exit status used by the command-line front end.
//   2: the input was rejected, 3: the computation hit an unphysical state, 4: I/O.
constexpr int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnphysicalEigenvalue:
        case ErrorKind::UnphysicalChannel:
        case ErrorKind::ChannelInverted:
        case ErrorKind::InvalidCovariance:
        case ErrorKind::InfiniteCapacity:
            return 3;
        case ErrorKind::IoError:
            return 4;
        default:
            return 2;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace cvqn
