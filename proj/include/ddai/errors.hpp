#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddai {

/// Malformed input row. `line` is 1-based; 0 means "not tied to a file line".
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A value outside the domain an operation accepts (label 2, p >= 1, ...).
class DomainError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class DivergedError : public NumericError {
public:
    DivergedError(int epoch, std::size_t batch)
        : NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                       ", batch " + std::to_string(batch)),
          epoch_(epoch), batch_(batch) {}

    int epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    int epoch_;
    std::size_t batch_;
};

/// Checkpoint and vocabulary do not belong together.
class CompatibilityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ddai
