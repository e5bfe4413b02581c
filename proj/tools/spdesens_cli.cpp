#include "spdesens/cli.hpp"

int main(int argc, char** argv) { return spdesens::run(argc, argv); }
