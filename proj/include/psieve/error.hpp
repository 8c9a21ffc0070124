#pragma once

#include <stdexcept>
#include <string>

namespace psieve {

/// Runtime failure surfaced to callers (bad input files, corrupt models, ...).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace psieve
