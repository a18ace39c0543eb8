#include <iostream>

#include "srlab/cli.hpp"

int main(int argc, char** argv) { return srlab::cli::run(argc, argv, std::cout, std::cerr); }
