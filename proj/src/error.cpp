#include "marscoloc/error.hpp"

namespace marscoloc {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Syntax: return "Syntax";
    case ErrorCode::UnterminatedSequence: return "UnterminatedSequence";
    case ErrorCode::UnterminatedComment: return "UnterminatedComment";
    case ErrorCode::UnterminatedString: return "UnterminatedString";
    case ErrorCode::DuplicateKeyword: return "DuplicateKeyword";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::AmbiguousField: return "AmbiguousField";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotNumeric: return "NotNumeric";
    case ErrorCode::UnitMismatch: return "UnitMismatch";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::UnrecognizedFormat: return "UnrecognizedFormat";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::BadRow: return "BadRow";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidPointing: return "InvalidPointing";
    case ErrorCode::InvalidRadius: return "InvalidRadius";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::NonSquarePixels: return "NonSquarePixels";
    case ErrorCode::RotatedTransform: return "RotatedTransform";
    case ErrorCode::AllNodata: return "AllNodata";
    case ErrorCode::Io: return "Io";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::NodataNeighborhood: return "NodataNeighborhood";
    case ErrorCode::NodataObserver: return "NodataObserver";
    case ErrorCode::EmptySector: return "EmptySector";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::HttpFailure: return "HttpFailure";
    case ErrorCode::ProductNotFound: return "ProductNotFound";
    case ErrorCode::CacheWrite: return "CacheWrite";
    case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

} // namespace marscoloc
