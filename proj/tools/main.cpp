#include "selfsync/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return selfsync::cli::run_cli(argc, argv, std::cout, std::cerr); }
