#include "implylp/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return implylp::cli::run(argc, argv, std::cout, std::cerr); }
