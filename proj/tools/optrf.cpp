#include "optrf/experiment.hpp"

int main(int argc, char** argv) { return optrf::cli_main(argc, argv); }
