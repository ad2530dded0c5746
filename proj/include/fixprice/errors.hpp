#pragma once

#include <stdexcept>
#include <string>

namespace fixprice {

/// Argument outside an operation's domain (bad probability level, negative
/// price, malformed distribution data, out-of-range generator parameters).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A pricing rule was asked for on an instance where its guarantee does not
/// apply (median condition, atomless requirement, r = 0).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or invalid input file. Messages carry the line/column or the
/// JSON field path that failed.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fixprice
