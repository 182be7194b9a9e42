#pragma once

#include <stdexcept>
#include <string>

namespace qdsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// configuration / usage problems (CLI exit code 2)
struct ConfigError : Error { using Error::Error; };

// bad data: addressing, routing, file contents (CLI exit code 3)
struct DataError : Error { using Error::Error; };
struct AddressingError : DataError { using DataError::DataError; };
struct RoutingError : DataError { using DataError::DataError; };
struct ParseError : DataError { using DataError::DataError; };
struct VersionError : DataError { using DataError::DataError; };
struct DimensionalityError : DataError { using DataError::DataError; };
struct SingularInputError : DataError { using DataError::DataError; };

// analysis failures (CLI exit code 4)
struct FitError : Error { using Error::Error; };
struct NoTurnOnError : FitError { using FitError::FitError; };
struct UnfittableDiamondError : FitError { using FitError::FitError; };
struct GeometryError : FitError { using FitError::FitError; };
struct InsufficientDataError : FitError { using FitError::FitError; };
struct DegenerateFitError : FitError { using FitError::FitError; };

} // namespace qdsim
