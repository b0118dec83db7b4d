// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>

namespace layoutloop
{

struct ProcessOutput
{
    int exit_code = 0;
    std::string out;
    std::string err;
};

/// Runs `command` through /bin/sh, feeding `input` on stdin.
/// Throws TimeoutError (after killing the process) when it outlives `timeout`,
/// ExternalToolError when it cannot be started.
[[nodiscard]] ProcessOutput run_shell(const std::string& command, const std::string& input,
                                      std::chrono::milliseconds timeout);

/// Single-quotes a string for safe interpolation into a shell command.
[[nodiscard]] std::string shell_quote(const std::string& text);

} // namespace layoutloop
