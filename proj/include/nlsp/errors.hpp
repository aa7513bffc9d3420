#pragma once

#include <stdexcept>
#include <string>

namespace nlsp {

// Bad user input: config files, CLI flags, dimension mismatches at API
// boundaries. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime (exit code 2 from the CLI).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class RankDeficiencyError : public NumericError {
public:
    explicit RankDeficiencyError(const std::string& what) : NumericError(what) {}
};

class NotSpdError : public NumericError {
public:
    explicit NotSpdError(const std::string& what) : NumericError(what) {}
};

class ConvergenceError : public NumericError {
public:
    explicit ConvergenceError(const std::string& what) : NumericError(what) {}
};

class MeshError : public NumericError {
public:
    explicit MeshError(const std::string& what) : NumericError(what) {}
};

class TrainingDivergedError : public NumericError {
public:
    explicit TrainingDivergedError(const std::string& what) : NumericError(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nlsp
