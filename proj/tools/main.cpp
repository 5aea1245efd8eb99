#include <iostream>

#include "saccadic/cli.hpp"

int main(int argc, char** argv) { return saccadic::run_cli(argc, argv, std::cout, std::cerr); }
