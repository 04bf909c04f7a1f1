#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace streamspan {

// Input file could not be parsed. line is 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, std::uint64_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

    std::uint64_t line() const { return line_; }

private:
    std::uint64_t line_;
};

// Weight order violated in a stream that was promised nondecreasing.
// position is the 1-based index of the offending edge.
class WeightOrderError : public std::runtime_error {
public:
    WeightOrderError(std::string msg, std::uint64_t position)
        : std::runtime_error("edge " + std::to_string(position) + ": " + msg),
          position_(position) {}

    std::uint64_t position() const { return position_; }

private:
    std::uint64_t position_;
};

// A stream transducer held more state than its declared budget.
class StateBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A pass saw records that violate the stream's structural contract
// (unpaired occurrence, orphan edge, duplicate input edge, ...).
class StreamCorruptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An exact check was asked to run on an instance larger than its guard.
class GuardLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace streamspan
