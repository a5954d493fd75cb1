#pragma once

#include <stdexcept>
#include <string>

namespace herdlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration / assumption problems (CLI exit code 2).
struct ValidationError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Runtime failures (CLI exit code 3).
struct CoefficientError : Error { using Error::Error; };
struct ObservableError : Error { using Error::Error; };
struct FitError : Error { using Error::Error; };
struct EvaluationError : Error { using Error::Error; };
struct MissingNoiseError : Error { using Error::Error; };

struct BlowupError : Error {
    BlowupError(const std::string& what, int step_index, double time)
        : Error(what), step(step_index), t(time) {}
    int step;
    double t;
};

// Filesystem problems (CLI exit code 4).
struct IoError : Error { using Error::Error; };

}  // namespace herdlab
