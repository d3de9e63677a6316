#include <iostream>

#include "dkg/cli.hpp"

int main(int argc, char** argv) { return dkg::run_cli(argc, argv, std::cout, std::cerr); }
