// Runs every acceptance criterion from the default verify configuration and
// exits non-zero unless all of them pass.
#include <exception>
#include <iostream>

#include "sqglab/cli_runner.hpp"

int main(int argc, char** argv) {
  const std::string config = argc > 1 ? argv[1] : SQGLAB_DEFAULT_CONFIG;
  const std::string out = argc > 2 ? argv[2] : "acceptance_out";
  try {
    sqg::ExecOptions opt;
    opt.out_dir = out;
    return sqg::execute(sqg::load_config(config), opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
