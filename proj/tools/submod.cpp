#include "submod/cli/app.hpp"

int main(int argc, char** argv) { return submod::cli::run(argc, argv); }
