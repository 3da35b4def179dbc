#ifndef LOCALBN_ERRORS_HPP
#define LOCALBN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace localbn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user-supplied data (feature vectors, weights
// documents, configs, CSV rows).
struct ValidationError : Error {
    using Error::Error;
};

// Wire-format violations on the external-process bridge.
struct ProtocolError : Error {
    using Error::Error;
};

// Process-level bridge failures: spawn, broken pipe, timeout, early exit.
struct BridgeError : Error {
    using Error::Error;
};

}  // namespace localbn

#endif  // LOCALBN_ERRORS_HPP
