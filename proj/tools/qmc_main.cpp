#include "qmc/cli/commands.hpp"

int main(int argc, char** argv) { return qmc::cli::run_cli(argc, argv); }
