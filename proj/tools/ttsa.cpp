#include "ttsa/cli.hpp"

int main(int argc, char** argv) { return ttsa::run_cli(argc, argv); }
