#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace riskstrat {

// All library failures derive from Error and carry a stable machine-readable
// kind ("MissingColumn", "SingleClass", ...) next to the human message.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error("[" + kind + "] " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// Input/schema problems (bad files, bad codes, bad shapes). The CLI maps
// these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

// Numeric/internal problems (non-finite loss, failed convergence guards).
// The CLI maps these to exit code 1.
class ComputeError : public Error {
public:
    using Error::Error;
};

}  // namespace riskstrat
