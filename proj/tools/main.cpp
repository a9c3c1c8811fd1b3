#include <orthant/cli.hpp>

int main(int argc, char** argv) { return orthant::run_cli(argc, argv); }
