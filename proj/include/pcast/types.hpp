#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pcast {

using NodeId = std::int64_t;
using LocationId = std::int64_t;
using Timestamp = std::int64_t; // seconds since trace start

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy maps onto CLI exit codes: validation -> 1, I/O -> 2,
// anything else escaping to main -> 3.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : ValidationError {
  ParseError(const std::string& what, long line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line(line) {}
  long line;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace pcast
