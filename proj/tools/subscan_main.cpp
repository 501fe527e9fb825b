#include "subscan/cli.hpp"

int main(int argc, char** argv) { return subscan::cli::run(argc, argv); }
