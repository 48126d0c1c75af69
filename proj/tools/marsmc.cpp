#include "marsmc/pipeline/cli.hpp"

int main(int argc, char** argv) { return marsmc::pipeline::cli_main(argc, argv); }
