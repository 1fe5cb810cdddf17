#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace carskit {

using Scalar = double;
using Array = Eigen::ArrayXd;
using Eigen::Index;

// Error categories map onto CLI exit codes: 2 config, 3 data, 4 numeric.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 2;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 3;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 4;
};

inline bool all_finite(const Array& a) { return a.isFinite().all(); }

}  // namespace carskit
