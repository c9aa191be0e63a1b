#pragma once

#include <stdexcept>
#include <string>

namespace qipf {

// Base error carrying a stable machine-parsable category string. The CLI
// prints errors as "error: <category>: <message>" on a single line.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class InvalidParameterError : public Error {
public:
    explicit InvalidParameterError(const std::string& message)
        : Error("invalid-parameter", message) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& message) : Error("data", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

class DegenerateDataError : public Error {
public:
    explicit DegenerateDataError(const std::string& message)
        : Error("degenerate-data", message) {}
};

class UndefinedMetricError : public Error {
public:
    explicit UndefinedMetricError(const std::string& message)
        : Error("undefined-metric", message) {}
};

class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& message, int epoch)
        : Error("training-diverged", message), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

} // namespace qipf
