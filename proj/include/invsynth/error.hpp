#ifndef INVSYNTH_ERROR_HPP
#define INVSYNTH_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace invsynth {

enum class Errc {
  UnknownToken,
  ArityMismatch,
  TypeMismatch,
  UnbalancedParens,
  MissingDelimiter,
  NotRepresentable,
  SyntaxError,
  UnsupportedConstruct,
  SortMismatch,
  BruteForceLimitExceeded,
  SolverProcessFailure,
  RetryExhausted,
  NoGuaranteedExamples,
  InfeasibleSpec,
  BackendFailure,
  Timeout,
  EmptyBeam,
  InvalidArgument,
  IoError,
};

std::string_view errc_name(Errc code);

// Every failure surfaced by the library is an Error carrying a machine-checkable
// code; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace invsynth

#endif  // INVSYNTH_ERROR_HPP
