#include "homoflow/cli.hpp"

int main(int argc, char** argv) { return homoflow::run_cli(argc, argv); }
