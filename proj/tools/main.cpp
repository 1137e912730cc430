#include "nlcap/cli.hpp"

int main(int argc, char** argv) { return nlcap::run_cli(argc, argv); }
