#include "austen/commands.hpp"

int main(int argc, char** argv) { return austen::cli::run(argc, argv); }
