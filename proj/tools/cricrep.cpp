#include <iostream>
#include <string>
#include <vector>

#include "cricrep/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cricrep::run_cli(args, std::cout, std::cerr);
}
