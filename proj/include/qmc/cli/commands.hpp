#pragma once

namespace qmc::cli {

// Exit status: 0 pass, 1 assertion failure, 2 usage or parse error,
// 3 budget exceeded.
int run_cli(int argc, char** argv);

}  // namespace qmc::cli
