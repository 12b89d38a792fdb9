#include "mrgap/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mrgap::run_cli(argc, argv, std::cout, std::cerr); }
