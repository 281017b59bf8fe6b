#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace invbayes {

/// Invalid configuration or usage; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read, written or parsed; maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structured parse failure in a data file.
class ParseError : public IoError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : IoError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Training produced a non-finite loss; maps to CLI exit code 4.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t epoch, std::size_t batch, const std::string& detail)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch) + ": " + detail),
          epoch_(epoch),
          batch_(batch) {}

    std::size_t epoch() const { return epoch_; }
    std::size_t batch() const { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

/// A simulator returned a non-finite value.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace invbayes
