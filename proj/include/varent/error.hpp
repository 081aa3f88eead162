#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varent {

// Precondition and domain failures. The CLI maps every DomainError to exit status 1.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientPrefix : public DomainError {
public:
    explicit InsufficientPrefix(const std::string& what) : DomainError("insufficient prefix: " + what) {}
};

class EmptyCompactSet : public DomainError {
public:
    explicit EmptyCompactSet(const std::string& what = {})
        : DomainError(what.empty() ? "empty compact set" : "empty compact set: " + what) {}
};

class TruncationTooShallow : public DomainError {
public:
    explicit TruncationTooShallow(const std::string& what) : DomainError("truncation too shallow: " + what) {}
};

class InfeasibleError : public DomainError {
public:
    using DomainError::DomainError;
};

class ParseError : public DomainError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DomainError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace varent
