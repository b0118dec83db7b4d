// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/cli.hpp>

#include <iostream>

int main(int argc, char** argv, char** envp)
{
    return layoutloop::run_cli(argc, argv, envp, std::cout, std::cerr);
}
