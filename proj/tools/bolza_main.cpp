#include "bolza/cli.hpp"

int main(int argc, char** argv) { return bolza::run_cli(argc, argv); }
