#include "hym/cli/pipeline.hpp"

int main(int argc, char** argv) { return hym::cli::run_main(argc, argv); }
