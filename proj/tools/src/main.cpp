#include <iostream>

#include "nlsq_cli/commands.hpp"

int main(int argc, char** argv) { return nlsq::cli::run(argc, argv, std::cout, std::cerr); }
