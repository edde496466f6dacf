#include "cli.hpp"

int main(int argc, char** argv) { return styletalk::cli::run_cli(argc, argv); }
