#include "an2vec/cli/app.hpp"

int main(int argc, char** argv) { return an2vec::cli::run(argc, argv); }
