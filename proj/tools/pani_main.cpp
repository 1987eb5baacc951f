#include "pani/cli.hpp"

int main(int argc, char** argv) { return pani::run_cli(argc, argv); }
