#include <string>
#include <vector>

#include "kerrcav/cli.hpp"

int main(int argc, char** argv) {
    return kerrcav::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
