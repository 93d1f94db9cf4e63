#include <iostream>

#include "lyapsim/cli_io.hpp"

int main(int argc, char** argv) { return lyapsim::run_cli(argc, argv, std::cout, std::cerr); }
