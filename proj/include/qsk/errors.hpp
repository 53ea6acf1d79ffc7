#pragma once

#include <stdexcept>
#include <string>

namespace qsk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooFewPoints : Error { using Error::Error; };
struct DuplicatePoints : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct DegeneratePointSet : Error { using Error::Error; };
struct CorruptSketch : Error { using Error::Error; };
struct VersionMismatch : Error { using Error::Error; };
struct LeafOutOfRange : Error { using Error::Error; };
struct BlockMismatch : Error { using Error::Error; };
struct AmplificationExhausted : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct MalformedRecord : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct BadMagic : Error { using Error::Error; };
struct NormZero : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct CountTooLarge : Error { using Error::Error; };

}  // namespace qsk
