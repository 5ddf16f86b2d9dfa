#include "cli.hpp"

int main(int argc, char** argv) { return bfvar::cli::main_entry(argc, argv); }
