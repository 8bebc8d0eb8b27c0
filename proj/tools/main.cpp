#include "commands.hpp"

int main(int argc, char** argv) {
    return hybridwind::cli::run(std::vector<std::string>(argv, argv + argc));
}
