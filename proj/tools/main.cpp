#include "fpxl/runner.hpp"

int main(int argc, char** argv) { return fpxl::run_cli(argc, argv); }
