#pragma once

#include <stdexcept>
#include <string>

namespace scs {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched or degenerate tensor/operator shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid argument values (negative sigma, bad block geometry, ...).
class ParamError : public Error {
public:
    using Error::Error;
};

// Codec misuse: empty codebook, inconsistent code stream.
class CodecError : public Error {
public:
    using Error::Error;
};

class CodebookTooLargeError : public CodecError {
public:
    using CodecError::CodecError;
};

class DecodeError : public CodecError {
public:
    using CodecError::CodecError;
};

// File ingestion / persistence failures; message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

// Step-size search hit a non-finite objective.
class SearchError : public Error {
public:
    using Error::Error;
};

} // namespace scs
