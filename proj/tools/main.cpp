#include <iostream>
#include <string>
#include <vector>

#include "conman/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return conman::cli::run(args, std::cout, std::cerr);
}
