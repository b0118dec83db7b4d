// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace layoutloop
{

inline constexpr int exit_ok = 0;
inline constexpr int exit_internal_error = 1;
inline constexpr int exit_input_error = 2;

/// Command-line entry point. Subcommands: synth, eval, perturb, pairs, rm-train, rm-eval,
/// advantages, simulate, serve. Returns 0 on success, 2 on input errors, 1 otherwise.
int run_cli(int argc, const char* const* argv, char** envp, std::ostream& out, std::ostream& err);

} // namespace layoutloop
