#pragma once

#include <stdexcept>
#include <string>

namespace cknn {

enum class ErrorKind {
  kInvalidArgument,
  kEmptyDataset,
  kEmptyTestSet,
  kUnknownSession,
  kMalformedInput,
  kIo,
  kSplit,
};

/// All library failures are reported through this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cknn
