#include "vbgk/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return vbgk::cli::run_cli(argc, argv, std::cout, std::cerr); }
