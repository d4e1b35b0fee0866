#include "pcast/cli.hpp"

int main(int argc, char** argv) { return pcast::run_cli(argc, argv); }
