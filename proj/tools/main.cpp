#include "stadium/cli.hpp"

int main(int argc, char** argv) { return stadium::run_cli(argc, argv); }
