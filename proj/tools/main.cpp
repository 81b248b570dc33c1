#include "evoshift/cli.hpp"

int main(int argc, char** argv) { return evoshift::run_cli(argc, argv); }
