#include "jsr/cli.hpp"

int main(int argc, char** argv) { return jsr::cli::main(argc, argv); }
