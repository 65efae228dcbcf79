#include "gmspike/cli.hpp"

int main(int argc, char** argv) { return gmspike::cli_main(argc, argv); }
