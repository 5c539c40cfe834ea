#pragma once

#include <stdexcept>
#include <string>

namespace hml {

enum class ErrorKind {
  kDimension,      // shapes do not line up
  kInvalidArgument,
  kRankDeficient,  // singular system with no regularization
  kVacuousFiring,  // every upper firing strength is zero
  kNumerical,      // factorization or iteration failed
  kDataFormat,     // malformed input file
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace hml
