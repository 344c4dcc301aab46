#include <iostream>

#include "forestfill/harness.hpp"

int main(int argc, char** argv) { return forestfill::run_cli(argc, argv, std::cout, std::cerr); }
