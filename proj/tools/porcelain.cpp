#include "porcelain/cli.hpp"

int main(int argc, char** argv) { return porcelain::cli::run(argc, argv); }
