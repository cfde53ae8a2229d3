#pragma once

#include <stdexcept>
#include <string>

namespace pad {

enum class ErrorKind { usage, data, internal };

// All library failures surface as pad::Error. The kind maps onto CLI exit
// codes (usage -> 1, data -> 2, internal -> 3).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error data_error(const std::string& what) { return {ErrorKind::data, what}; }
inline Error usage_error(const std::string& what) { return {ErrorKind::usage, what}; }
inline Error internal_error(const std::string& what) { return {ErrorKind::internal, what}; }

}  // namespace pad
