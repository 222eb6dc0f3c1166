#include <iostream>

#include "colu/experiments.hpp"

int main(int argc, char** argv) { return colu::exp::cli_main(argc, argv, std::cout, std::cerr); }
