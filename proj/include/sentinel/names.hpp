#pragma once

#include <string>
#include <string_view>

namespace sentinel {

// Logic variables are plain strings. Program identifiers never contain '#',
// so freshly generated names cannot collide with user code.
using Var = std::string;

// Deterministic fresh-name source. A single counter is threaded through a
// whole run (parser, verifier, solver), which keeps every artifact of a run
// byte-stable across repeated invocations.
class NameSupply {
 public:
  Var fresh(std::string_view base) {
    return std::string(base) + "#" + std::to_string(counter_++);
  }

  long current() const { return counter_; }

 private:
  long counter_ = 0;
};

inline bool is_machine_name(const Var& v) {
  return v.find('#') != std::string::npos;
}

}  // namespace sentinel
