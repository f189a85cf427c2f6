#include <iostream>

#include "motstab_cli/cli.hpp"

int main(int argc, char** argv) { return motstab::cli::run(argc, argv, std::cout, std::cerr); }
