#include "cli.hpp"

int main(int argc, char** argv) { return crqkit::cli::run(argc, argv); }
