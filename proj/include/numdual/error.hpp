#pragma once

#include <stdexcept>
#include <string>

namespace numdual {

// Coarse error classes; the C bindings map these to integer codes.
enum class Errc {
  kInvalidArgument = 1,
  kParse = 2,
  kValidation = 3,
  kUnsupported = 4,
  kIo = 5,
  kDegenerate = 6,
  kInternal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace numdual
