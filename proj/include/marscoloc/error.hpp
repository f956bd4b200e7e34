#pragma once

#include <stdexcept>
#include <string>

namespace marscoloc {

enum class ErrorCode {
    Syntax,
    UnterminatedSequence,
    UnterminatedComment,
    UnterminatedString,
    DuplicateKeyword,
    UnsupportedConstruct,
    MissingField,
    AmbiguousField,
    LengthMismatch,
    NotNumeric,
    UnitMismatch,
    MalformedXml,
    UnrecognizedFormat,
    MissingColumn,
    DuplicateKey,
    EmptyTable,
    BadRow,
    NotFound,
    InvalidPointing,
    InvalidRadius,
    InvalidArgument,
    UnsupportedFormat,
    NonSquarePixels,
    RotatedTransform,
    AllNodata,
    Io,
    OutOfBounds,
    NodataNeighborhood,
    NodataObserver,
    EmptySector,
    GridMismatch,
    EmptyInput,
    HttpFailure,
    ProductNotFound,
    CacheWrite,
    Config,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is
/// stable and meant for programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A label syntax error positioned at a 1-based line and column.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, const std::string& message, int line, int column)
        : Error(code, "line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace marscoloc
