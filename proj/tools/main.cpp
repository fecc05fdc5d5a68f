#include <iostream>

#include "threatfix/cli.hpp"

int main(int argc, char** argv) { return threatfix::run_cli(argc, argv, std::cout, std::cerr); }
