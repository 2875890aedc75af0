#include <iostream>

#include "memoir/cli.hpp"

int main(int argc, char** argv) { return memoir::run_cli(argc, argv, std::cout, std::cerr); }
