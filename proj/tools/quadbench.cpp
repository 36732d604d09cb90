#include <iostream>

#include "quadbench/cli.hpp"

int main(int argc, char** argv) { return quadbench::run_cli(argc, argv, std::cout, std::cerr); }
