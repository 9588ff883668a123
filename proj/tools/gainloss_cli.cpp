#include "gainloss/cli/app.hpp"

int main(int argc, char** argv) { return gainloss::cli::run(argc, argv); }
