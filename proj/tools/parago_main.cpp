#include "parago/cli.hpp"

int main(int argc, char** argv) { return parago::main_entry(argc, argv); }
