#ifndef KINKLAB_COMMON_HPP
#define KINKLAB_COMMON_HPP

#include <iostream>
#include <stdexcept>
#include <string>

namespace kinklab {

// Destination for validity warnings (asymptotic formulas used outside their
// regime, etc.). Set to nullptr to silence, e.g. inside sweeps.
inline std::ostream*& warning_stream() {
  static std::ostream* stream = &std::cerr;
  return stream;
}

inline void warn_if(bool condition, const std::string& message) {
  if (condition && warning_stream()) *warning_stream() << "warning: " << message << "\n";
}

// A numerical invariant was violated at runtime (norm/trace drift, negative
// probability, root bracketing failure, edge contact on a lattice that was
// supposed to be effectively infinite).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// File I/O failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kinklab

#endif
