#include <iostream>

#include "qpoisson/cli.hpp"

int main(int argc, char** argv) { return qpoisson::cli::run(argc, argv, std::cout, std::cerr); }
