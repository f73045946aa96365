#include "hcdesign/cli.hpp"

int main(int argc, char** argv) { return hcdesign::cli::run(argc, argv); }
