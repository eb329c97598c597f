#include <iostream>

#include "netpower/cli.hpp"

int main(int argc, char** argv) { return netpower::cli::run(argc, argv, std::cout, std::cerr); }
