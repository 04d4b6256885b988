#include <iostream>

#include "dnlg/cli/pipeline.hpp"

int main(int argc, char** argv) { return dnlg::cli::main(argc, argv, std::cout, std::cerr); }
