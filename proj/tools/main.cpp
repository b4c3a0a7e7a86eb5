#include "commands.hpp"

int main(int argc, char** argv) { return bison::cli::run(argc, argv); }
