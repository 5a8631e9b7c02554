#include "osp/cli.hpp"

int main(int argc, char** argv) { return osp::cli_main(argc, argv); }
