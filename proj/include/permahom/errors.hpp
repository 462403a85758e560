#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace permahom {

/// Exit-code families used by the CLI (see README).
enum class ErrorClass {
    config = 2,       ///< malformed or invalid configuration
    convergence = 3,  ///< iterative solver exhausted its caps
    validation = 4,   ///< geometry / property / consistency failure
};

/// Base of all toolkit errors. what() carries the full message.
class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg)
        : std::runtime_error(msg), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

private:
    ErrorClass cls_;
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line)
        : Error(ErrorClass::config, msg + " (line " + std::to_string(line) + ")"),
          line_number(line) {}
    int line_number;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(ErrorClass::config, msg) {}
};

struct ObstacleTouchesBoundary : Error {
    explicit ObstacleTouchesBoundary(const std::string& msg)
        : Error(ErrorClass::validation, msg) {}
};

struct DisconnectedFluid : Error {
    explicit DisconnectedFluid(const std::string& msg)
        : Error(ErrorClass::validation, msg) {}
};

struct NonIntegerTiling : Error {
    explicit NonIntegerTiling(const std::string& msg)
        : Error(ErrorClass::config, msg) {}
};

struct EmptyObstacle : Error {
    explicit EmptyObstacle(const std::string& msg)
        : Error(ErrorClass::validation, msg) {}
};

/// Carries the outer-iteration divergence-residual history for diagnosis.
struct NotConverged : Error {
    NotConverged(const std::string& msg, std::vector<double> history)
        : Error(ErrorClass::convergence, msg), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

struct MaskMismatch : Error {
    explicit MaskMismatch(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

struct SPDViolation : Error {
    explicit SPDViolation(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

struct GridMismatch : Error {
    explicit GridMismatch(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

struct MisalignedGrid : Error {
    explicit MisalignedGrid(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

struct OnCellBoundary : Error {
    explicit OnCellBoundary(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

struct GridTooLarge : Error {
    explicit GridTooLarge(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

struct InconsistentRuns : Error {
    explicit InconsistentRuns(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

}  // namespace permahom
