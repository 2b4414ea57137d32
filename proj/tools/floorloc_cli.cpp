#include "floorloc/cli.hpp"

int main(int argc, char** argv) { return floorloc::cli::run(argc, argv); }
