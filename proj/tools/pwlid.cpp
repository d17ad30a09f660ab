#include <string>
#include <vector>

#include "pwl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pwl::run_cli(args);
}
