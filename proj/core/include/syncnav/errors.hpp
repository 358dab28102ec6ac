#pragma once

#include <stdexcept>
#include <string>

namespace syncnav {

/// The auxiliary state's scaling block is (numerically) singular.
class SingularAuxiliaryError : public std::domain_error {
 public:
  explicit SingularAuxiliaryError(double det)
      : std::domain_error("auxiliary scaling block is singular (det = " + std::to_string(det) + ")"),
        det_(det) {}
  double determinant() const { return det_; }

 private:
  double det_;
};

/// Input data could not be used: malformed rows, unsorted streams, missing
/// samples.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The CSV header does not match the expected schema.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace syncnav
