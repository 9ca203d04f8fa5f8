#pragma once

#include <stdexcept>
#include <string>

namespace slt {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadCrop : Error {
    explicit BadCrop(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

struct DegeneratePolygon : Error {
    explicit DegeneratePolygon(const std::string& msg) : Error(msg) {}
};

struct DegenerateData : Error {
    explicit DegenerateData(const std::string& msg) : Error(msg) {}
};

struct BadRank : Error {
    explicit BadRank(const std::string& msg) : Error(msg) {}
};

struct DegenerateFit : Error {
    explicit DegenerateFit(const std::string& msg) : Error(msg) {}
};

struct ImplausibleTransform : Error {
    explicit ImplausibleTransform(const std::string& msg) : Error(msg) {}
};

struct BadQuery : Error {
    explicit BadQuery(const std::string& msg) : Error(msg) {}
};

struct MissingMatches : Error {
    explicit MissingMatches(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace slt
