#include "vichoice/cli.hpp"

int main(int argc, char** argv) { return vichoice::cli::run_cli(argc, argv); }
