#pragma once

#include <ostream>

namespace gmmot::cli {

/// Runs one invocation of the command-line tool. Returns the process exit
/// status: 0 on success, 1 with a single "error: <kind>: <message>" line on
/// `err` otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gmmot::cli
