#include <iostream>

#include "cvinfer/cli.hpp"

int main(int argc, char** argv) { return cvinfer::run_cli(argc, argv, std::cout, std::cerr); }
