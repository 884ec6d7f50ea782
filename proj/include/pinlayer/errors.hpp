#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pinlayer {

// Base class for all recoverable solver failures. Subcommands map these to
// structured error JSON and exit code 1.
struct Error : std::runtime_error {
    explicit Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind(std::move(kind)) {}
    std::string kind;
};

struct BistabilityLost : Error {
    explicit BistabilityLost(double v, const std::string& what)
        : Error("BistabilityLost", what), v(v) {}
    double v;
};

struct NoBalancedState : Error {
    explicit NoBalancedState(const std::string& what) : Error("NoBalancedState", what) {}
};

struct DegenerateBalance : Error {
    explicit DegenerateBalance(const std::string& what) : Error("DegenerateBalance", what) {}
};

struct UnbalancedFront : Error {
    explicit UnbalancedFront(const std::string& what) : Error("UnbalancedFront", what) {}
};

struct MassOutOfRange : Error {
    explicit MassOutOfRange(const std::string& what) : Error("MassOutOfRange", what) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& what) : Error("NoConvergence", what) {}
};

struct JacobianSingular : Error {
    explicit JacobianSingular(const std::string& what) : Error("JacobianSingular", what) {}
};

struct FactorizationFailed : Error {
    explicit FactorizationFailed(const std::string& what) : Error("FactorizationFailed", what) {}
};

struct StiffnessOverflow : Error {
    explicit StiffnessOverflow(const std::string& what) : Error("StiffnessOverflow", what) {}
};

struct NoZeroFound : Error {
    explicit NoZeroFound(const std::string& what) : Error("NoZeroFound", what) {}
};

struct ResonantDenominator : Error {
    explicit ResonantDenominator(const std::string& what) : Error("ResonantDenominator", what) {}
};

struct LinearSolveFailure : Error {
    explicit LinearSolveFailure(const std::string& what) : Error("LinearSolveFailure", what) {}
};

struct WindowNotFound : Error {
    explicit WindowNotFound(const std::string& what) : Error("WindowNotFound", what) {}
};

struct QuadratureFailure : Error {
    explicit QuadratureFailure(const std::string& what) : Error("QuadratureFailure", what) {}
};

struct RootFindingFailure : Error {
    explicit RootFindingFailure(const std::string& what) : Error("RootFindingFailure", what) {}
};

struct ParseError : Error {
    ParseError(int line, int column, const std::string& what)
        : Error("ParseError", what), line(line), column(column) {}
    int line;
    int column;
};

struct ValidationError : Error {
    explicit ValidationError(std::vector<std::string> keys, const std::string& what)
        : Error("ValidationError", what), offending_keys(std::move(keys)) {}
    std::vector<std::string> offending_keys;
};

} // namespace pinlayer
