#include "maldicom/errors.hpp"

namespace maldicom {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedElement: return "TruncatedElement";
        case ErrorCode::UnsupportedTransferSyntax: return "UnsupportedTransferSyntax";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::BadMzMagic: return "BadMzMagic";
        case ErrorCode::BadPeSignature: return "BadPeSignature";
        case ErrorCode::ELfanewOutOfRange: return "ELfanewOutOfRange";
        case ErrorCode::MalformedSectionTable: return "MalformedSectionTable";
        case ErrorCode::NegativeOffset: return "NegativeOffset";
        case ErrorCode::PreambleOverflow: return "PreambleOverflow";
        case ErrorCode::EvenGroupTag: return "EvenGroupTag";
        case ErrorCode::PayloadTagCollision: return "PayloadTagCollision";
        case ErrorCode::OffsetOverflow: return "OffsetOverflow";
        case ErrorCode::RecordMismatch: return "RecordMismatch";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::NonNumericFeature: return "NonNumericFeature";
        case ErrorCode::UnknownCategoryToken: return "UnknownCategoryToken";
        case ErrorCode::ClassTooSmall: return "ClassTooSmall";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::WidthMismatch: return "WidthMismatch";
        case ErrorCode::EmptyBackground: return "EmptyBackground";
        case ErrorCode::TooManyFeaturesForExact: return "TooManyFeaturesForExact";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace maldicom
