#include "treegan/cli.hpp"

int main(int argc, char** argv) { return treegan::run_cli(argc, argv); }
