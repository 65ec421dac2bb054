#include "adrx/cli.hpp"

int main(int argc, char** argv) { return adrx::hx::cli_main(argc, argv); }
