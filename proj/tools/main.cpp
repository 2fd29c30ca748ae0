#include "sunet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sunet::cli_main({argv, argv + argc}, std::cout, std::cerr); }
