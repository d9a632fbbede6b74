#include "molrel/cli/commands.hpp"

int main(int argc, char** argv) { return molrel::cli::run(argc, argv); }
