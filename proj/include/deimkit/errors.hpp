#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deimkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct NonFiniteError : Error {
  using Error::Error;
};

// Zero (or effectively zero) pivot/diagonal; `index` is the offending position.
struct SingularError : Error {
  SingularError(const std::string& what, std::size_t idx) : Error(what), index(idx) {}
  std::size_t index = 0;
};

struct RankError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace deimkit
