#include "cli.hpp"

int main(int argc, char** argv) { return hesitant::cli::run(argc, argv); }
