#pragma once

#include <ostream>

namespace lgs {

/// Entry point of the lgs command line; returns the process exit code.
/// 0 when every asserted tolerance holds, 1 when one fails, 2 on usage or
/// input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lgs
