#include "nicsim/cli.hpp"

int main(int argc, char** argv) { return nicsim::run_cli(argc, argv); }
