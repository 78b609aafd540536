#ifndef GMK_ERROR_HPP
#define GMK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gmk {

enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  BadFormat,
  NotFound,
  NumericFailure,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace gmk

#endif
