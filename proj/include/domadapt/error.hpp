#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace domadapt {

/// Base exception for all toolkit failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the pipeline runner; carries the name of the stage that failed.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace domadapt
