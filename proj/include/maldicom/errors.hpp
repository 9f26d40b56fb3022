#pragma once

#include <stdexcept>
#include <string>

namespace maldicom {

enum class ErrorCode {
    // dicom
    TooShort,
    BadMagic,
    TruncatedElement,
    UnsupportedTransferSyntax,
    InvariantViolation,
    // pe
    BadMzMagic,
    BadPeSignature,
    ELfanewOutOfRange,
    MalformedSectionTable,
    NegativeOffset,
    // polyglot
    PreambleOverflow,
    EvenGroupTag,
    PayloadTagCollision,
    OffsetOverflow,
    RecordMismatch,
    // detector
    EmptyWindow,
    // triage
    SchemaMismatch,
    NonNumericFeature,
    UnknownCategoryToken,
    ClassTooSmall,
    DegenerateData,
    WidthMismatch,
    EmptyBackground,
    TooManyFeaturesForExact,
    // io
    IoError,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace maldicom
