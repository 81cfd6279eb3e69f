#include "fusionplan_cli.hpp"

int main(int argc, char** argv) { return fusionplan::run_cli(argc, argv); }
