#include "commands.hpp"

int main(int argc, char** argv) { return invsynth::cli::main(argc, argv); }
