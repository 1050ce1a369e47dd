#pragma once

#include <stdexcept>
#include <string>

namespace qfd {

// Raised for unreadable/unparsable input files and malformed datasets.
// The CLI maps this to exit code 2.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when training produces a non-finite loss. CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Checkpoint load failures, split by cause so callers can tell them apart.
class checkpoint_error : public data_error {
public:
    explicit checkpoint_error(const std::string& what) : data_error(what) {}
};

class checkpoint_parse_error : public checkpoint_error {
public:
    explicit checkpoint_parse_error(const std::string& what) : checkpoint_error(what) {}
};

class checkpoint_version_error : public checkpoint_error {
public:
    explicit checkpoint_version_error(const std::string& what) : checkpoint_error(what) {}
};

class checkpoint_shape_error : public checkpoint_error {
public:
    explicit checkpoint_shape_error(const std::string& what) : checkpoint_error(what) {}
};

class checkpoint_kind_error : public checkpoint_error {
public:
    explicit checkpoint_kind_error(const std::string& what) : checkpoint_error(what) {}
};

} // namespace qfd
