#include "convctx/error.hpp"

namespace convctx {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::DanglingParent: return "DanglingParent";
        case ErrorCode::MultipleRoots: return "MultipleRoots";
        case ErrorCode::NoRoot: return "NoRoot";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::MissingPolarityLabel: return "MissingPolarityLabel";
        case ErrorCode::MalformedFile: return "MalformedFile";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::MissingEmbedding: return "MissingEmbedding";
        case ErrorCode::NegativeWeight: return "NegativeWeight";
        case ErrorCode::MissingLabel: return "MissingLabel";
        case ErrorCode::SingleClassData: return "SingleClassData";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::TooFewTrees: return "TooFewTrees";
        case ErrorCode::EmptyEvalSet: return "EmptyEvalSet";
        case ErrorCode::NotBinaryTask: return "NotBinaryTask";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

bool is_configuration_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingLabel:
        case ErrorCode::MissingPolarityLabel:
        case ErrorCode::InvalidSpec:
        case ErrorCode::InvalidConfig:
        case ErrorCode::NotBinaryTask:
        case ErrorCode::TooFewTrees:
        case ErrorCode::DimensionMismatch:
            return true;
        default:
            return false;
    }
}

}  // namespace convctx
