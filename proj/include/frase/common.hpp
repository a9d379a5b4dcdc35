#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace frase {

// Error categories map onto CLI exit codes: usage=1, input=2, service=3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class ServiceError : public Error {
public:
    using Error::Error;
};

// Tokenization failure with the byte offset of the offending character.
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : InputError(msg + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// ---- string helpers ----

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Collapse runs of whitespace to single spaces and trim the ends.
std::string normalize_whitespace(std::string_view s);

// Split on whitespace runs; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

// Lowercased alphanumeric word tokens ("What's P31?" -> {what, s, p31}).
std::vector<std::string> word_tokens(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

// ---- hashing ----

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

// ---- filesystem ----

std::string read_file(const std::filesystem::path& path);

// Write via temp file + rename so readers never observe partial content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string iso8601_utc_now();

}  // namespace frase
