#include <iostream>

#include "commands.h"

int main(int argc, char** argv) { return spvs::cli::RunCli(argc, argv, std::cout, std::cerr); }
