#pragma once

#include <iosfwd>

namespace unkml::cli {

// Parses argv, runs the selected command and returns the process exit code.
// Errors go to `err` as a one-line JSON object {"error": kind, "message": ...}.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unkml::cli
