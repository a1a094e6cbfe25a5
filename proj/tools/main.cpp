#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return capfactor::cli::run(argc, argv, std::cout, std::cerr); }
