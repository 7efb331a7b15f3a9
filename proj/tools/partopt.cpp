#include "partopt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return partopt::cli::run(argc, argv, std::cout, std::cerr); }
