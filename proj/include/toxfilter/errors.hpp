#pragma once

#include <stdexcept>
#include <string>

namespace toxfilter {

/// Invalid argument or malformed input data.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed content in a bundled or user-supplied file.
class parse_error : public input_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : input_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit parse_error(const std::string& what) : input_error(what), line_(0) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Inconsistent configuration, e.g. a vocabulary entry missing a field a
/// filter mode requires.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A comment contains no vocabulary term, so no attack can be applied to it.
class no_trigger_error : public std::runtime_error {
public:
    explicit no_trigger_error(const std::string& comment_id)
        : std::runtime_error("comment '" + comment_id + "' contains no vocabulary term"),
          comment_id_(comment_id) {}

    const std::string& comment_id() const noexcept { return comment_id_; }

private:
    std::string comment_id_;
};

} // namespace toxfilter
