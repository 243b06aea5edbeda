#include <iostream>

#include "zbias/cli.hpp"

int main(int argc, char** argv) { return zbias::cli::run(argc, argv, std::cout, std::cerr); }
