#include "foldsim/cli.hpp"

int main(int argc, char** argv) { return foldsim::run_cli(argc, argv); }
