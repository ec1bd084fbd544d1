#include "tosc_cli.hpp"

int main(int argc, char** argv) { return tosc::cli::main_entry(argc, argv); }
