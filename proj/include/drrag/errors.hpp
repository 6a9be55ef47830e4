#pragma once

#include <stdexcept>
#include <string>

namespace drrag {

/// File, format, or content problem: missing files, malformed rows,
/// id conflicts, schema violations.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// HTTP backend failure: connection refused, timeout, non-2xx status,
/// or a response body that does not match the wire protocol.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace drrag
