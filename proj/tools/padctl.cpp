#include "pad/cli/cli.hpp"

int main(int argc, char** argv) { return pad::cli::dispatch(argc, argv); }
