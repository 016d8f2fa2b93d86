#include "skinseg/commands.hpp"

int main(int argc, char** argv) { return skinseg::cli::run(argc, argv); }
