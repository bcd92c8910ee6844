#include "rpca/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rpca::cli::run(argc, argv, std::cout, std::cerr); }
