#include <iostream>
#include <string>
#include <vector>

#include "divfield/cli.hpp"

int main(int argc, char** argv) {
  return divfield::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
