#pragma once

#include <stdexcept>
#include <string>

namespace hybridwind {

// Every failure raised by the library derives from Error so callers (the CLI in
// particular) can map categories onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class DataQualityError : public Error { using Error::Error; };
class SizeError : public Error { using Error::Error; };
class UndefinedMetricError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class DependencyError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

}  // namespace hybridwind
