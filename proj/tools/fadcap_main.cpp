#include "fadcap/cli.hpp"

int main(int argc, char** argv) { return fadcap::cli::run(argc, argv); }
