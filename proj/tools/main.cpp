#include "cli.hpp"

int main(int argc, char** argv) { return hierslu::cli::run(argc, argv); }
