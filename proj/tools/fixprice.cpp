#include <iostream>

#include "fixprice/cli.hpp"

int main(int argc, char** argv) { return fixprice::cli::run_cli(argc, argv, std::cout, std::cerr); }
