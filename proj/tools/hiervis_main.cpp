#include "hiervis/cli.hpp"

int main(int argc, char** argv) { return hiervis::cli::run(argc, argv); }
