#include "sorted_effects/cli/run.hpp"

#include <iostream>

int main(int argc, char** argv) { return sorted_effects::cli::cli_main(argc, argv, std::cout, std::cerr); }
