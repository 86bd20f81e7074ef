#pragma once

#include <functional>
#include <optional>
#include <string>

#include "numdual/error.hpp"

namespace numdual::testing {

// Runs fn, returning the thrown error code (nullopt when fn succeeds).
inline std::optional<Errc> thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace numdual::testing
