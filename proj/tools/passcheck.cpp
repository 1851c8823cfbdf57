#include "passivity/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return passivity::run_cli(argc, argv, std::cout, std::cerr); }
