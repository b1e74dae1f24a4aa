#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace convctx {

enum class ErrorCode {
    // discussion_graph
    EmptyInput,
    DuplicateId,
    DanglingParent,
    MultipleRoots,
    NoRoot,
    CycleDetected,
    UnknownId,
    MissingPolarityLabel,
    // embeddings
    MalformedFile,
    DimensionMismatch,
    MissingEmbedding,
    // context_features / classifier
    NegativeWeight,
    MissingLabel,
    SingleClassData,
    NonFiniteLoss,
    // evaluation
    TooFewTrees,
    EmptyEvalSet,
    NotBinaryTask,
    // synthetic_corpus / cli
    InvalidSpec,
    InvalidConfig,
    Io,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// True for errors caused by user-supplied configuration rather than runtime
/// conditions; the CLI maps these to exit status 2.
bool is_configuration_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace convctx
