#include <cstdio>
#include <string>

#include "symfact/cli.hpp"

int main(int argc, char** argv) {
  std::string out;
  std::string err;
  const int code = symfact::cli::run_cli(argc, argv, out, err);
  std::fwrite(out.data(), 1, out.size(), stdout);
  std::fwrite(err.data(), 1, err.size(), stderr);
  return code;
}
