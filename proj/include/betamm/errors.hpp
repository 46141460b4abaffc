#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace betamm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Order book
class CrossingOrder : public Error { using Error::Error; };
class InvalidVolume : public Error { using Error::Error; };
class UnknownOrder : public Error { using Error::Error; };
class EmptySide : public Error { using Error::Error; };
class InvalidPrice : public Error { using Error::Error; };

// Data ingest
class MalformedRow : public Error {
public:
    MalformedRow(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class TimeRegression : public Error {
public:
    TimeRegression(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Beta profiles
class DomainError : public Error { using Error::Error; };
class DegenerateMode : public Error { using Error::Error; };
class InconsistentState : public Error { using Error::Error; };

// Replay / harness
class DataExhausted : public Error { using Error::Error; };
class EpisodeTooLong : public Error { using Error::Error; };
class EmptyInput : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };

}  // namespace betamm
