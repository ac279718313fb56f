// Pieces of the command-line front end shared with the acceptance runner.

#ifndef INVSYNTH_TOOLS_COMMANDS_HPP
#define INVSYNTH_TOOLS_COMMANDS_HPP

#include <memory>
#include <string>

#include "invsynth/engine.hpp"
#include "invsynth/oracle.hpp"
#include "invsynth/spec.hpp"
#include "invsynth/synth.hpp"

namespace invsynth::cli {

// "brute", "bitblast", "external" or "auto". `auto` uses brute force when
// the state fits the enumeration limit, then z3 when it answers, then the
// bit-blaster. Throws InvalidArgument on other names.
SolverConfig solver_for(const std::string& name, const std::string& command, unsigned state_bits);

// "enum", "grammar" or "external:<command>". The built-in backends get the
// spec's constants. Throws InvalidArgument.
std::unique_ptr<Synthesizer> synthesizer_for(const std::string& kind, const InvariantSpec& spec);

// One line-delimited run report.
std::string report_line(const std::string& benchmark, const InvariantSpec& spec,
                        const RunResult& r);

int main(int argc, char** argv);

}  // namespace invsynth::cli

#endif  // INVSYNTH_TOOLS_COMMANDS_HPP
