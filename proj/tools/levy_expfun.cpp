#include "levy_expfun/cli.hpp"

int main(int argc, char** argv) { return levy_expfun::run(argc, argv); }
