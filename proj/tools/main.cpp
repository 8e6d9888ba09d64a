#include "cli.hpp"

int main(int argc, char** argv) { return orthosmooth::cli::run(argc, argv); }
