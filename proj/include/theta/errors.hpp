#pragma once

#include <stdexcept>

namespace theta {

/// Malformed or out-of-range caller input.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical kernel failed (eigensolver non-convergence, singular factorization, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant was violated; indicates a bug or an uncertified input.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace theta
