#include "commands.hpp"

int main(int argc, char** argv) { return wtn::cli::run(argc, argv); }
