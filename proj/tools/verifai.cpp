#include "cli/cli.hpp"

int main(int argc, char** argv) { return verifai::cli::main(argc, argv); }
