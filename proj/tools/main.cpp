#include "eplab/cli/commands.hpp"

int main(int argc, char** argv) { return eplab::cli::run_cli(argc, argv); }
