#include "tcboost/cli.hpp"

int main(int argc, char** argv) { return tcboost::cli::run(argc, argv); }
