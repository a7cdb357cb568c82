#include <iostream>

#include "featsel/cli.hpp"

int main(int argc, char** argv) { return featsel::run_cli(argc, argv, std::cout, std::cerr); }
