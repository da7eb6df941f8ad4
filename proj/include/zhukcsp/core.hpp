#ifndef ZHUKCSP_CORE_HPP
#define ZHUKCSP_CORE_HPP

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace zhukcsp {

using Elem = std::uint8_t;
using Tuple = std::vector<Elem>;

// Error kinds map to CLI exit codes: Input -> 2, Cap -> 3, Diagnostic -> 4.
enum class ErrorKind { Input, Cap, Diagnostic };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(std::string msg) : Error(ErrorKind::Input, std::move(msg)) {}
};

// Thrown when a closure or search exceeds its budget; carries the count reached.
class CapError : public Error {
public:
    CapError(std::string msg, std::size_t reached)
        : Error(ErrorKind::Cap, std::move(msg) + " (reached " + std::to_string(reached) + ")"),
          reached_(reached) {}
    std::size_t reached() const { return reached_; }

private:
    std::size_t reached_;
};

// Internal-inconsistency diagnostics ("ubiquity violated", "union not affine", ...).
class DiagnosticError : public Error {
public:
    explicit DiagnosticError(std::string msg) : Error(ErrorKind::Diagnostic, std::move(msg)) {}
};

struct TupleHash {
    std::size_t operator()(const Tuple& t) const {
        std::uint64_t h = 1469598103934665603ull;
        for (Elem e : t) {
            h ^= e;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// Binary relation on a domain of size <= 8, one bit per ordered pair (a*8+b).
using RelMask = std::uint64_t;

inline RelMask rel_bit(int a, int b) { return RelMask{1} << (a * 8 + b); }
inline bool rel_has(RelMask r, int a, int b) { return (r >> (a * 8 + b)) & 1; }

inline RelMask rel_diagonal(int n) {
    RelMask r = 0;
    for (int a = 0; a < n; ++a) r |= rel_bit(a, a);
    return r;
}

inline RelMask rel_full(int n) {
    RelMask r = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) r |= rel_bit(a, b);
    return r;
}

inline RelMask rel_transpose(RelMask r, int n) {
    RelMask out = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (rel_has(r, a, b)) out |= rel_bit(b, a);
    return out;
}

inline RelMask rel_compose(RelMask r, RelMask s, int n) {
    RelMask out = 0;
    for (int a = 0; a < n; ++a) {
        std::uint64_t row = (r >> (a * 8)) & 0xff;
        std::uint64_t acc = 0;
        for (int c = 0; c < n; ++c)
            if ((row >> c) & 1) acc |= (s >> (c * 8)) & 0xff;
        out |= acc << (a * 8);
    }
    return out;
}

inline bool rel_is_subdirect(RelMask r, int n) {
    for (int a = 0; a < n; ++a) {
        if (((r >> (a * 8)) & 0xff) == 0) return false;
        bool col = false;
        for (int b = 0; b < n; ++b) col |= rel_has(r, b, a);
        if (!col) return false;
    }
    return true;
}

// Connectivity of the bipartite graph of a subdirect binary relation.
inline bool rel_is_linked(RelMask r, int n) {
    if (!rel_is_subdirect(r, n)) return false;
    // vertices: left 0..n-1, right n..2n-1
    std::uint32_t seen = 1;  // start from left vertex 0
    bool grew = true;
    while (grew) {
        grew = false;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (!rel_has(r, a, b)) continue;
                bool l = (seen >> a) & 1, rr = (seen >> (n + b)) & 1;
                if (l != rr) {
                    seen |= (1u << a) | (1u << (n + b));
                    grew = true;
                }
            }
    }
    return seen == (1u << (2 * n)) - 1;
}

inline std::uint64_t ipow(std::uint64_t base, unsigned exp) {
    std::uint64_t r = 1;
    while (exp--) r *= base;
    return r;
}

}  // namespace zhukcsp

#endif
