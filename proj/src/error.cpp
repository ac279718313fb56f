#include "invsynth/error.hpp"

namespace invsynth {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::UnknownToken: return "UnknownToken";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::UnbalancedParens: return "UnbalancedParens";
    case Errc::MissingDelimiter: return "MissingDelimiter";
    case Errc::NotRepresentable: return "NotRepresentable";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnsupportedConstruct: return "UnsupportedConstruct";
    case Errc::SortMismatch: return "SortMismatch";
    case Errc::BruteForceLimitExceeded: return "BruteForceLimitExceeded";
    case Errc::SolverProcessFailure: return "SolverProcessFailure";
    case Errc::RetryExhausted: return "RetryExhausted";
    case Errc::NoGuaranteedExamples: return "NoGuaranteedExamples";
    case Errc::InfeasibleSpec: return "InfeasibleSpec";
    case Errc::BackendFailure: return "BackendFailure";
    case Errc::Timeout: return "Timeout";
    case Errc::EmptyBeam: return "EmptyBeam";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace invsynth
