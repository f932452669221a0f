#include "pg/core/errors.hpp"

namespace pg {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::MissingLandmarks: return "MissingLandmarks";
        case ErrorCode::ImageTooSmall: return "ImageTooSmall";
        case ErrorCode::SingleClassDataset: return "SingleClassDataset";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmbedderDimensionMismatch: return "EmbedderDimensionMismatch";
        case ErrorCode::DegenerateLandmarks: return "DegenerateLandmarks";
        case ErrorCode::EmptyManifest: return "EmptyManifest";
        case ErrorCode::BatchTooLarge: return "BatchTooLarge";
        case ErrorCode::UnknownAttribute: return "UnknownAttribute";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::StageMismatch: return "StageMismatch";
        case ErrorCode::MissingCheckpoint: return "MissingCheckpoint";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::UnsupportedResolution: return "UnsupportedResolution";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::InsufficientImages: return "InsufficientImages";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace pg
