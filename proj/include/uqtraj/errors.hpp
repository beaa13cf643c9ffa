#pragma once

#include <stdexcept>
#include <string>

namespace uqtraj {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidCovariance : Error {
    using Error::Error;
};

struct DegenerateEllipse : Error {
    using Error::Error;
};

struct SingularInnovation : Error {
    using Error::Error;
};

struct IngestError : Error {
    IngestError(const std::string& msg, long line) : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    explicit IngestError(const std::string& msg) : Error(msg), line(-1) {}
    long line;
};

struct NumericalOverflow : Error {
    using Error::Error;
};

struct NumericalFailure : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct GradCheckFailure : Error {
    using Error::Error;
};

}  // namespace uqtraj
