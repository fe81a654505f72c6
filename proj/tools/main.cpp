#include <string>
#include <vector>

#include "bilevel/io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bilevel::io::cli_main(args);
}
