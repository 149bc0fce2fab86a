#include "surreal/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    surreal::tune_allocator();
    return surreal::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
