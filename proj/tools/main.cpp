#include <iostream>

#include "gdev/cli.hpp"

int main(int argc, char** argv) { return gdev::run_cli(argc, argv, std::cout, std::cerr); }
