#include <string>
#include <vector>

#include "stirap/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return stirap::cli::main(args);
}
