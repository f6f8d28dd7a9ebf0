#pragma once

#include <stdexcept>
#include <string>

namespace tmm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid layout, region literal, bank or sweep configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A message or call that violates an interface contract (unknown agent,
/// mismatched question ids, answer for a question that is not pending).
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Operation invoked in the wrong lifecycle phase (stepping a terminal game,
/// initialising a belief from a mid-game state).
class LifecycleError : public Error {
public:
    using Error::Error;
};

class CorruptionError : public Error {
public:
    CorruptionError(const std::string& what, long tick)
        : Error(what), tick_(tick) {}

    /// First divergent tick, or -1 when the damage is not tick-specific.
    long tick() const noexcept { return tick_; }

private:
    long tick_;
};

class UnsupportedVersionError : public Error {
public:
    using Error::Error;
};

class UnsupportedQuestionError : public Error {
public:
    using Error::Error;
};

class UndefinedScoreError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

}  // namespace tmm
