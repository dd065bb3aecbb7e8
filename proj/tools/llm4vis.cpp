#include <iostream>

#include "llm4vis/cli.hpp"

int main(int argc, char** argv) { return llm4vis::cli::run(argc, argv, std::cout, std::cerr); }
