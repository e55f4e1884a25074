#include <iostream>

#include "phogsvm/cli.hpp"

int main(int argc, char** argv) { return phogsvm::cli::run(argc, argv, std::cout, std::cerr); }
