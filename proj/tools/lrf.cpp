#include "lrf/cli.hpp"

int main(int argc, char** argv) { return lrf::cli::run(argc, argv); }
