// Apache License, Version 2.0, refer to LICENSE.txt

#include "cli.hpp"

int main(int argc, char** argv) { return richfit::cli::run(argc, argv); }
