#include "mmdval/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return mmdval::run_cli(argc, argv, std::cout, std::cerr);
}
