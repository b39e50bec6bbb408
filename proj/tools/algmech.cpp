#include "algmech/cli.hpp"

int main(int argc, char** argv) { return algmech::run_cli(argc, argv); }
