#include "inclusive/cli.hpp"

int main(int argc, char** argv) { return inclusive::cli::main(argc, argv); }
