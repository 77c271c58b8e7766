#include <iostream>

#include "mbisac/harness/cli.hpp"

int main(int argc, char** argv) { return mbisac::harness::runCli(argc, argv, std::cout, std::cerr); }
