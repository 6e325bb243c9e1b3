#pragma once

#include <stdexcept>
#include <string>

namespace bsq {

enum class ErrorKind {
  Structural,
  Constraint,
  DegenerateParameter,
  Resonant,
  Solvability,
  Twist,
  Geometry,
  DegenerateEmbedding,
  Direction,
  NoDichotomy,
  PerturbationTooLarge,
  TruncationResonance,
  Divergence,
  ScheduleExhausted,
  AlignmentFailure,
  PrecheckFailed,
  Config,
  Io
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace bsq
