#include "sclab/cli.hpp"

int main(int argc, char** argv) { return sclab::cli_main(argc, argv); }
