#include <iostream>

#include "cantorlab/cli.hpp"

int main(int argc, char** argv) { return cantorlab::cli::main(argc, argv, std::cout, std::cerr); }
