#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  hfa::cli::install_interrupt_handler();
  std::vector<std::string> args(argv, argv + argc);
  return hfa::cli::run(args, std::cout, std::cerr);
}
