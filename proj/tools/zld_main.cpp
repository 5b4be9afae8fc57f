#include "zld/cli.hpp"

int main(int argc, char** argv) { return zld::run(argc, argv); }
