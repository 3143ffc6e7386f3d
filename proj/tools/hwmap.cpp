#include "hwm/cli.hpp"

int main(int argc, char** argv) { return hwm::run_cli(argc, argv); }
