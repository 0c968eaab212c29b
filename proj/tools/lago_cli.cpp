#include "lago/cli.hpp"

int main(int argc, char** argv) { return lago::cli_main(argc, argv); }
