#include "cli.h"

int main(int argc, char** argv) { return ppx::cli::dispatch(argc, argv); }
