#include "herdlab/run.hpp"

int main(int argc, char** argv) { return herdlab::run_cli(argc, argv); }
