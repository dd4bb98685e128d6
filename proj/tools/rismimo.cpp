#include "rismimo/cli/commands.hpp"

int main(int argc, char** argv) { return rismimo::cli::main_entry(argc, argv); }
