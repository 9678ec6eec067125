#include "trapsim/runner.hpp"

int main(int argc, char** argv) { return trapsim::runner::run_cli(argc, argv); }
