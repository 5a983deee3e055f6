#include "spcm/cli.hpp"

int main(int argc, char** argv) { return spcm::cli::main_entry(argc, argv); }
