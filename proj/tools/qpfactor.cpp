#include <iostream>
#include <string>
#include <vector>

#include "qpfactor/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qpf::cli_main(args, std::cout, std::cerr);
}
