#pragma once

#include <stdexcept>
#include <string>

namespace merton {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// A correlation matrix could not be factorized within the allowed jitter.
class NotPsdError : public std::runtime_error {
  public:
    NotPsdError(const std::string& what, double failed_jitter)
        : std::runtime_error(what), failed_jitter_(failed_jitter) {}

    double failed_jitter() const noexcept { return failed_jitter_; }

  private:
    double failed_jitter_;
};

// Malformed input file; line is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

// Well-formed input that violates a semantic constraint (gaps, k > n, ...).
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A computation produced a result that cannot be used.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace merton
