#pragma once

#include <stdexcept>
#include <string>

namespace olens {

// Bad caller input: mismatched dimensions, unknown labels, out-of-range
// indices, malformed parameters. Maps to CLI exit code 2.
class invalid_input_error : public std::runtime_error {
public:
    explicit invalid_input_error(const std::string& what) : std::runtime_error(what) {}
};

// Unparseable input file. Carries the offending line (1-based) or byte
// offset when known; 0 means unknown.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
        : std::runtime_error(what), line_(line), offset_(offset) {}
    std::size_t line() const { return line_; }
    std::size_t offset() const { return offset_; }

private:
    std::size_t line_;
    std::size_t offset_;
};

// Refusal of a computation whose cost guard was exceeded (exhaustive
// enumerations). Maps to CLI exit code 3.
class guard_error : public std::runtime_error {
public:
    explicit guard_error(const std::string& what) : std::runtime_error(what) {}
};

// A search that legitimately found nothing (e.g. no candidate passed).
class not_found_error : public std::runtime_error {
public:
    explicit not_found_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical construction failed (singular or indefinite matrix).
class construction_error : public std::runtime_error {
public:
    explicit construction_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace olens
