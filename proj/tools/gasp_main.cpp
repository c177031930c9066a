#include "gasp/cli.hpp"

int main(int argc, char** argv) { return gasp::cli::dispatch(argc, argv); }
