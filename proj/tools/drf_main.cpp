#include "drf/cli.hpp"

int main(int argc, char** argv) { return drf::run_cli(argc, argv); }
