#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace atlas {

// Base for every failure the engine reports to callers.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input document (bad JSON, wrong types).
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input that breaks a domain invariant. Carries every violation found.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}
    explicit ValidationError(const std::string& violation)
        : ValidationError(std::vector<std::string>{violation}) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Snapshot version mismatch on a write.
class ConflictError : public Error {
public:
    using Error::Error;
};

}  // namespace atlas
