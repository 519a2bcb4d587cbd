#pragma once

namespace drf {

/// Entry point of the drf tool. Returns the process exit code:
/// 0 success, 1 usage/configuration/file failure, 2 numeric failure.
int run_cli(int argc, char** argv);

} // namespace drf
