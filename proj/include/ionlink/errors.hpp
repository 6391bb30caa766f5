#pragma once

#include <stdexcept>
#include <string>

namespace ionlink {

// Exit-code mapping for the CLI: config 1, convergence 2, I/O 3.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ionlink
