#include "tce/cli.hpp"

int main(int argc, char** argv) { return tce::cli::run(argc, argv); }
