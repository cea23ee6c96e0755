#include <iostream>

#include "assure/cli.hpp"

int main(int argc, char** argv) { return assure::cli::run_cli(argc, argv, std::cout, std::cerr); }
