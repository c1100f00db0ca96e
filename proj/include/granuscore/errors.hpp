#pragma once

#include <stdexcept>
#include <string>

namespace granuscore {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Embedding backend failed (lookup miss, inference failure, transport).
class BackendError : public Error {
public:
    BackendError(const std::string& what, bool retriable = false)
        : Error(what), retriable_(retriable) {}
    bool retriable() const { return retriable_; }

private:
    bool retriable_;
};

// Point on/outside the ball, invalid curvature, undefined similarity.
class GeometryError : public Error {
public:
    using Error::Error;
};

// Operands live in different embedding spaces.
class SpaceMismatchError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite values, malformed records, bad targets.
class DataError : public Error {
public:
    using Error::Error;
};

// Archive load/save problems: version mismatch, missing section, truncation.
class ArchiveError : public Error {
public:
    using Error::Error;
};

// Metric or statistic is undefined on the given input.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// A required external resource (corpus, taxonomy) could not be resolved.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class AnnotationError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

} // namespace granuscore
