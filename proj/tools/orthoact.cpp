#include "orthoact/cli.hpp"

int main(int argc, char** argv) { return orthoact::cli::run(argc, argv); }
