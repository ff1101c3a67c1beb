#pragma once

#include <stdexcept>
#include <string>

namespace trajthermo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotHermitian : Error {
    using Error::Error;
};
struct NotPSD : Error {
    using Error::Error;
};
struct Singular : Error {
    using Error::Error;
};
struct NotIsometry : Error {
    using Error::Error;
};
struct NotUnitary : Error {
    using Error::Error;
};
struct NotCompletable : Error {
    using Error::Error;
};
struct SizeMismatch : Error {
    using Error::Error;
};
struct LengthTooLarge : Error {
    using Error::Error;
};
struct InvalidState : Error {
    using Error::Error;
};
struct DegenerateNormalization : Error {
    using Error::Error;
};

// Singular gauge matrix in a backward recursion; carries the step index.
struct SingularG : Error {
    int step;
    SingularG(int step_, const std::string& msg) : Error(msg), step(step_) {}
};

struct TooManyQubits : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace trajthermo
