#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return qrisk::cli::run(argc, argv, std::cout, std::cerr); }
