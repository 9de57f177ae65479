#include "aggrolab/cli.hpp"

int main(int argc, char** argv) { return aggrolab::cli::main(argc, argv); }
