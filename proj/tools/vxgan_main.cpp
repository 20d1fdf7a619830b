#include "vxgan/cli.hpp"

int main(int argc, char** argv) { return vxgan::run_cli(argc, argv); }
