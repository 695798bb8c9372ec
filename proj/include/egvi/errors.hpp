#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace egvi {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Input file does not conform to its format. `line()` is 1-based, 0 if unknown.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class OutOfVocabulary : public Error {
  public:
    explicit OutOfVocabulary(std::string word)
        : Error("out of vocabulary: '" + word + "'"), word_(std::move(word)) {}
    const std::string& word() const noexcept { return word_; }

  private:
    std::string word_;
};

class OutOfInventory : public Error {
  public:
    explicit OutOfInventory(std::string word)
        : Error("no inventory entry for '" + word + "'"), word_(std::move(word)) {}
    const std::string& word() const noexcept { return word_; }

  private:
    std::string word_;
};

class ZeroVector : public Error {
  public:
    using Error::Error;
};

// ego and member have identical stored vectors, so w - w_i = 0.
class DegenerateDelta : public Error {
  public:
    using Error::Error;
};

// No in-vocabulary token is available to build a context vector.
class NoContext : public Error {
  public:
    using Error::Error;
};

class DegenerateVariance : public Error {
  public:
    using Error::Error;
};

}  // namespace egvi
