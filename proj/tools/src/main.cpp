#include "mtt/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mtt::cli::run_command(args, std::cout, std::cerr);
}
