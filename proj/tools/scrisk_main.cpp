#include <string>
#include <vector>

#include "scrisk/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return scrisk::cli::run(args);
}
