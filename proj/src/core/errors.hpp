#ifndef ATTACKLAB_ERRORS_HPP
#define ATTACKLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace attacklab {

// Failure classes, chosen so callers (and the C API / CLI) can map an
// exception to a process exit code without string matching.
enum class ErrorKind {
  invalid_argument,  // bad dimensions, out-of-range parameters, domain errors
  config,            // unreadable / malformed spec files and option sets
  transport,         // sockets: connect, bind, timeout, protocol violations
  precondition,      // violated operation preconditions (e.g. non-adversarial source)
  io,                // failed artifact writes
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace attacklab

#endif
