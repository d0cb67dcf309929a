#include "pfsi/cli_io.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return pfsi::cli_main(argc, argv, std::cout, std::cerr);
}
