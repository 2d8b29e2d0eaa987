#pragma once

#include <iosfwd>

namespace mmf::cli {

/// Exit codes: 0 success, 2 config or usage error, 3 numerical abort, 4 I/O error.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmf::cli
