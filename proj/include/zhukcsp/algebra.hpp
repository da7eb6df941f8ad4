#ifndef ZHUKCSP_ALGEBRA_HPP
#define ZHUKCSP_ALGEBRA_HPP

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "zhukcsp/core.hpp"

namespace zhukcsp {

// A finite domain 0..size-1 with one basic operation of odd arity n >= 3,
// stored as a full table in lexicographic argument order, first argument
// most significant.
struct FiniteAlgebra {
    int size = 0;
    int arity = 0;
    std::vector<Elem> table;

    bool idempotent = false;
    bool wnu = false;
    bool special = false;
    bool symmetric = false;  // value depends only on the argument multiset

    Elem apply(const std::vector<Elem>& args) const {
        assert(static_cast<int>(args.size()) == arity);
        std::size_t idx = 0;
        for (Elem a : args) idx = idx * size + a;
        return table[idx];
    }

    Elem apply_ptr(const Elem* args) const {
        std::size_t idx = 0;
        for (int i = 0; i < arity; ++i) idx = idx * size + args[i];
        return table[idx];
    }

    // w(x,...,x,y) with y in the given position.
    Elem apply_one_off(Elem x, Elem y, int pos) const {
        std::vector<Elem> args(arity, x);
        args[pos] = y;
        return apply(args);
    }

    bool operator==(const FiniteAlgebra& o) const {
        return size == o.size && arity == o.arity && table == o.table;
    }
};

namespace detail {

inline void decode_args(std::size_t idx, int size, int arity, std::vector<Elem>& args) {
    for (int i = arity - 1; i >= 0; --i) {
        args[i] = static_cast<Elem>(idx % size);
        idx /= size;
    }
}

inline bool check_idempotent(const FiniteAlgebra& a) {
    std::vector<Elem> args(a.arity);
    for (int x = 0; x < a.size; ++x) {
        std::fill(args.begin(), args.end(), static_cast<Elem>(x));
        if (a.apply(args) != x) return false;
    }
    return true;
}

inline bool check_wnu(const FiniteAlgebra& a) {
    for (int x = 0; x < a.size; ++x)
        for (int y = 0; y < a.size; ++y) {
            Elem v = a.apply_one_off(static_cast<Elem>(x), static_cast<Elem>(y), 0);
            for (int pos = 1; pos < a.arity; ++pos)
                if (a.apply_one_off(static_cast<Elem>(x), static_cast<Elem>(y), pos) != v)
                    return false;
        }
    return true;
}

inline bool check_special_identity(const FiniteAlgebra& a) {
    for (int x = 0; x < a.size; ++x)
        for (int y = 0; y < a.size; ++y) {
            Elem inner = a.apply_one_off(static_cast<Elem>(x), static_cast<Elem>(y), a.arity - 1);
            if (a.apply_one_off(static_cast<Elem>(x), inner, a.arity - 1) != inner) return false;
        }
    return true;
}

inline bool check_symmetric(const FiniteAlgebra& a) {
    std::vector<Elem> args(a.arity), sorted(a.arity);
    std::size_t total = a.table.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        decode_args(idx, a.size, a.arity, args);
        sorted = args;
        std::sort(sorted.begin(), sorted.end());
        if (a.table[idx] != a.apply(sorted)) return false;
    }
    return true;
}

}  // namespace detail

inline void compute_flags(FiniteAlgebra& a) {
    a.idempotent = detail::check_idempotent(a);
    a.wnu = detail::check_wnu(a);
    a.special = a.idempotent && a.wnu && detail::check_special_identity(a);
    a.symmetric = detail::check_symmetric(a);
}

// Exhaustive evaluation of the special identity w(x,..,x,w(x,..,x,y)) = w(x,..,x,y).
inline bool check_special(const FiniteAlgebra& a) { return detail::check_special_identity(a); }

inline FiniteAlgebra make_algebra(int size, int arity, std::function<Elem(const std::vector<Elem>&)> fn) {
    FiniteAlgebra a;
    a.size = size;
    a.arity = arity;
    a.table.resize(ipow(size, arity));
    std::vector<Elem> args(arity);
    for (std::size_t idx = 0; idx < a.table.size(); ++idx) {
        detail::decode_args(idx, size, arity, args);
        a.table[idx] = fn(args);
    }
    compute_flags(a);
    return a;
}

// --- algebra file format -------------------------------------------------
//
//   size <k>
//   arity <n>
//   table <k^n integers>
//
// Line-oriented, '#' starts a comment, tokens are whitespace-separated.

namespace detail {

struct Token {
    std::string text;
    int line, col;
};

inline std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::string cur;
    int tl = 0, tc = 0;
    bool comment = false;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back({cur, tl, tc});
            cur.clear();
        }
    };
    for (char c : text) {
        if (c == '\n') {
            flush();
            comment = false;
            ++line;
            col = 1;
            continue;
        }
        if (comment) {
            ++col;
            continue;
        }
        if (c == '#') {
            flush();
            comment = true;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            flush();
        } else {
            if (cur.empty()) {
                tl = line;
                tc = col;
            }
            cur += c;
        }
        ++col;
    }
    flush();
    return out;
}

inline long parse_int(const Token& t) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(t.text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != t.text.size())
        throw InputError("line " + std::to_string(t.line) + ", col " + std::to_string(t.col) +
                         ": expected integer, got '" + t.text + "'");
    return v;
}

}  // namespace detail

// Parses an algebra file. Rejects non-idempotent / non-WNU tables unless
// `force` is set (analysis tools may inspect arbitrary tables). A non-special
// table is accepted here; the solver entry point re-checks the special flag.
inline FiniteAlgebra load_algebra(const std::string& text, bool force = false) {
    auto toks = detail::tokenize(text);
    std::size_t i = 0;
    auto expect_key = [&](const char* key) {
        if (i >= toks.size())
            throw InputError(std::string("unexpected end of algebra file, expected '") + key + "'");
        if (toks[i].text != key)
            throw InputError("line " + std::to_string(toks[i].line) + ", col " +
                             std::to_string(toks[i].col) + ": expected '" + key + "', got '" +
                             toks[i].text + "'");
        ++i;
    };
    auto next_int = [&]() -> long {
        if (i >= toks.size()) throw InputError("unexpected end of algebra file");
        return detail::parse_int(toks[i++]);
    };

    expect_key("size");
    long size = next_int();
    expect_key("arity");
    long arity = next_int();
    if (size < 1 || size > 32) throw InputError("size must be in 1..32");
    if (arity < 3 || arity % 2 == 0) throw InputError("arity must be odd and >= 3");

    expect_key("table");
    std::uint64_t need = ipow(static_cast<std::uint64_t>(size), static_cast<unsigned>(arity));
    if (need > (1u << 26)) throw InputError("table too large");
    FiniteAlgebra a;
    a.size = static_cast<int>(size);
    a.arity = static_cast<int>(arity);
    a.table.reserve(need);
    while (i < toks.size()) {
        long v = detail::parse_int(toks[i]);
        if (v < 0 || v >= size)
            throw InputError("line " + std::to_string(toks[i].line) + ", col " +
                             std::to_string(toks[i].col) + ": table value " + std::to_string(v) +
                             " out of range 0.." + std::to_string(size - 1));
        a.table.push_back(static_cast<Elem>(v));
        ++i;
    }
    if (a.table.size() != need)
        throw InputError("table length mismatch: expected " + std::to_string(need) + " values, got " +
                         std::to_string(a.table.size()));
    compute_flags(a);
    if (!force && !(a.idempotent && a.wnu))
        throw InputError("operation is not an idempotent WNU");
    return a;
}

inline std::string algebra_to_text(const FiniteAlgebra& a) {
    std::ostringstream os;
    os << "size " << a.size << "\narity " << a.arity << "\ntable";
    for (Elem v : a.table) os << ' ' << int(v);
    os << '\n';
    return os.str();
}

// --- catalog --------------------------------------------------------------

// The conservative 3-element operation: sum mod 2 on {0,1}, 2 on (2,2,2),
// otherwise the first argument different from 2.
inline Elem f3_op(const std::vector<Elem>& x) {
    if (x[0] < 2 && x[1] < 2 && x[2] < 2) return static_cast<Elem>((x[0] + x[1] + x[2]) & 1);
    if (x[0] == 2 && x[1] == 2 && x[2] == 2) return 2;
    for (Elem v : x)
        if (v != 2) return v;
    return 2;
}

inline FiniteAlgebra catalog(const std::string& name) {
    auto sum_mod = [](int m) {
        return [m](const std::vector<Elem>& x) {
            int s = 0;
            for (Elem v : x) s += v;
            return static_cast<Elem>(s % m);
        };
    };
    if (name == "Z2" || name == "MIN3") return make_algebra(2, 3, sum_mod(2));
    if (name == "MAJ")
        return make_algebra(2, 3, [](const std::vector<Elem>& x) {
            return static_cast<Elem>((x[0] + x[1] + x[2]) >= 2 ? 1 : 0);
        });
    if (name == "AND3")
        return make_algebra(2, 3, [](const std::vector<Elem>& x) {
            return static_cast<Elem>(x[0] & x[1] & x[2]);
        });
    if (name == "DD3")  // dual discriminator: x if y != z, else y
        return make_algebra(3, 3, [](const std::vector<Elem>& x) {
            return x[1] == x[2] ? x[1] : x[0];
        });
    if (name == "F3") return make_algebra(3, 3, f3_op);
    if (name == "F5")  // f5(x1..x5) = f3(f3(x1,x2,x3), x4, x5)
        return make_algebra(3, 5, [](const std::vector<Elem>& x) {
            Elem inner = f3_op({x[0], x[1], x[2]});
            return f3_op({inner, x[3], x[4]});
        });
    if (name == "Z3") return make_algebra(3, 7, sum_mod(3));
    if (name == "Z4w5") return make_algebra(4, 5, sum_mod(4));
    if (name == "Z2xZ2")  // elements are pairs (e>>1, e&1), coordinatewise sum mod 2
        return make_algebra(4, 3, [](const std::vector<Elem>& x) {
            return static_cast<Elem>(x[0] ^ x[1] ^ x[2]);
        });
    throw InputError("unknown catalog algebra '" + name + "'");
}

inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = {"Z2",  "MAJ", "AND3", "MIN3", "DD3",
                                                   "F3",  "F5",  "Z3",   "Z4w5", "Z2xZ2"};
    return names;
}

// --- quotient / restrict ---------------------------------------------------

// Subuniverse check: B closed under the operation. Uses the sorted-multiset
// shortcut when the table is symmetric.
inline bool is_closed_subset(const FiniteAlgebra& a, const std::vector<Elem>& b) {
    int m = static_cast<int>(b.size());
    int n = a.arity;
    std::vector<bool> in(a.size, false);
    for (Elem e : b) in[e] = true;
    std::vector<int> idx(n, 0);
    std::vector<Elem> args(n);
    bool sym = a.symmetric;
    while (true) {
        for (int i = 0; i < n; ++i) args[i] = b[idx[i]];
        if (!in[a.apply(args)]) return false;
        int pos = n - 1;
        while (pos >= 0) {
            if (++idx[pos] < m) break;
            --pos;
        }
        if (pos < 0) break;
        int base = sym ? idx[pos] : 0;  // non-decreasing index tuples suffice when symmetric
        for (int i = pos + 1; i < n; ++i) idx[i] = base;
    }
    return true;
}

struct RestrictedAlgebra {
    FiniteAlgebra algebra;
    std::vector<Elem> embed;  // new label -> original element (increasing)
};

inline RestrictedAlgebra restrict_algebra(const FiniteAlgebra& a, std::vector<Elem> b) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (b.empty()) throw InputError("restrict: empty subset");
    for (Elem e : b)
        if (e >= a.size) throw InputError("restrict: element out of range");
    if (!is_closed_subset(a, b)) throw InputError("restrict: subset is not closed under the operation");
    std::vector<Elem> label(a.size, 0);
    for (std::size_t i = 0; i < b.size(); ++i) label[b[i]] = static_cast<Elem>(i);
    RestrictedAlgebra out;
    out.embed = b;
    out.algebra = make_algebra(static_cast<int>(b.size()), a.arity, [&](const std::vector<Elem>& x) {
        std::vector<Elem> orig(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) orig[i] = b[x[i]];
        return label[a.apply(orig)];
    });
    return out;
}

}  // namespace zhukcsp

#endif
