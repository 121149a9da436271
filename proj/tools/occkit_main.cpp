#include "occkit/cli.hpp"

int main(int argc, char** argv) { return occkit::cli::run(argc, argv); }
