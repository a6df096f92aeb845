#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndiag {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// An enumeration would exceed the configured cap.
class CapExceeded : public Error {
public:
    explicit CapExceeded(const std::string& msg) : Error(msg) {}
};

// Internal invariant violations surface as errors instead of silently
// producing wrong answers.
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& msg) : Error("invariant violated: " + msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

inline void require_invariant(bool cond, const std::string& msg) {
    if (!cond) throw InvariantError(msg);
}

// Deterministic PRNG (splitmix64). Used by the generators so that corpora
// are reproducible across platforms; never std::rand.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform value in [0, n). Modulo bias is irrelevant at the sizes used here.
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

    bool chance(uint64_t num, uint64_t den) { return below(den) < num; }

private:
    uint64_t state_;
};

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace ndiag
