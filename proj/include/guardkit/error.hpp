#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace guardkit {

// Base error for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Structural problem in a taxonomy document. Carries the offending node
// name when one can be identified.
class TaxonomyError : public Error {
public:
    TaxonomyError(const std::string& msg, std::string node = "")
        : Error(node.empty() ? msg : msg + " (node: " + node + ")"),
          node_(std::move(node)) {}

    const std::string& node() const { return node_; }

private:
    std::string node_;
};

// Candidate labels alone do not fit the sequence budget. Text can be
// truncated, labels cannot.
class CapacityError : public Error {
public:
    using Error::Error;
};

// A raw label string could not be mapped to the safe/unsafe pair.
class NormalizationError : public Error {
public:
    explicit NormalizationError(std::string raw)
        : Error("cannot normalize label to safe/unsafe: \"" + raw + "\""),
          raw_(std::move(raw)) {}

    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

// Malformed or invariant-violating line in a record file.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Failure inside a batch, tagged with the first failing item index.
class BatchItemError : public Error {
public:
    BatchItemError(const std::string& msg, std::size_t index)
        : Error("item " + std::to_string(index) + ": " + msg), index_(index) {}

    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

}  // namespace guardkit
