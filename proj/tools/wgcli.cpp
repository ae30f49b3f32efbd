#include <iostream>

#include "wg_cli.hpp"

int main(int argc, char** argv) { return wgcli::run(argc, argv, std::cout, std::cerr); }
