#include "certmon/cli.hpp"

int main(int argc, char** argv) { return certmon::run_cli(argc, argv); }
