#include <string>
#include <vector>

#include "nvsram/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nvsram::run_cli(args);
}
