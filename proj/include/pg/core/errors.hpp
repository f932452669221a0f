#pragma once

#include <stdexcept>
#include <string>

namespace pg {

enum class ErrorCode {
    EmptyMask,
    DimensionMismatch,
    MissingLandmarks,
    ImageTooSmall,
    SingleClassDataset,
    EmptyDataset,
    ShapeMismatch,
    EmbedderDimensionMismatch,
    DegenerateLandmarks,
    EmptyManifest,
    BatchTooLarge,
    UnknownAttribute,
    LengthMismatch,
    StageMismatch,
    MissingCheckpoint,
    NonFiniteLoss,
    UnsupportedResolution,
    DegenerateInput,
    InsufficientImages,
    InvalidArgument,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) raise(code, what);
}

}  // namespace pg
