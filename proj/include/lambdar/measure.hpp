#pragma once

// Variable levels and the cuts-level measure CL, a multiset of objects
// a(k,n) / b(k) ordered by a well-founded order whose multiset extension
// strictly decreases along substitution steps.

#include <ostream>
#include <sstream>

#include "lambdar/term.hpp"

namespace lambdar {

// lv_z(t): depth of z's free occurrences measured across chained explicit
// substitutions.  Distributors do not add depth.
inline size_t level(const Term& t, const Name& z) {
    switch (t.kind()) {
        case TermKind::Var:
        case TermKind::Hole:
            return 0;
        case TermKind::Abs:
            return t.name() == z ? 0 : level(t.body(), z);
        case TermKind::App:
            return std::max(level(t.fun(), z), level(t.arg(), z));
        case TermKind::Sub:
        case TermKind::Dist: {
            size_t body_lv = t.name() == z ? 0 : level(t.body(), z);
            if (!is_free_in(z, t.content())) return body_lv;
            size_t es = t.is_sub() ? 1 : 0;
            size_t binder_lv = level(t.body(), t.name());
            return std::max(body_lv, binder_lv + level(t.content(), z) + es);
        }
    }
    return 0;
}

// lv of the hole of the context denoted by (t, path): plug a probe variable.
inline size_t context_level(const Term& t, const Path& path) {
    static const Name probe = "\x01probe";
    return level(replace_at(t, path, Term::var(probe)), probe);
}

struct OObject {
    bool is_a;  // a(k, n) when true, b(k) otherwise
    size_t k;
    size_t n;  // meaningful for a-objects only

    static OObject a(size_t k, size_t n) { return {true, k, n}; }
    static OObject b(size_t k) { return {false, k, 0}; }

    friend bool operator==(const OObject& x, const OObject& y) {
        return x.is_a == y.is_a && x.k == y.k && (!x.is_a || x.n == y.n);
    }
    // canonical order for multiset storage, not the measure order
    friend bool operator<(const OObject& x, const OObject& y) {
        if (x.is_a != y.is_a) return x.is_a;
        if (x.k != y.k) return x.k < y.k;
        return x.is_a && x.n < y.n;
    }
};

// Strict well-founded order on objects.
inline bool o_greater(const OObject& x, const OObject& y) {
    if (x.is_a && y.is_a) return x.k > y.k || (x.k == y.k && x.n > y.n);
    if (x.is_a && !y.is_a) return x.k > y.k;
    if (!x.is_a && y.is_a) return x.k >= y.k;
    return x.k > y.k;
}
inline bool o_less(const OObject& x, const OObject& y) { return o_greater(y, x); }

// Multiset of objects, stored sorted.
struct OMeasure {
    std::vector<OObject> items;

    void add(OObject o) {
        items.insert(std::upper_bound(items.begin(), items.end(), o), o);
    }
    void join(const OMeasure& m) {
        for (const OObject& o : m.items) add(o);
    }
    // p . M lifts every first index by p
    OMeasure scaled(size_t p) const {
        OMeasure r;
        for (OObject o : items) {
            o.k += p;
            r.add(o);
        }
        return r;
    }
    friend bool operator==(const OMeasure& x, const OMeasure& y) { return x.items == y.items; }

    std::string str() const {
        std::ostringstream os;
        os << '[';
        bool first = true;
        for (const OObject& o : items) {
            if (!first) os << ", ";
            first = false;
            if (o.is_a)
                os << "a(" << o.k << ", " << o.n << ")";
            else
                os << "b(" << o.k << ")";
        }
        os << ']';
        return os.str();
    }
};

// Strict multiset extension of the object order: cancel common elements,
// then every survivor on the right must be dominated on the left.
inline bool mul_greater(const OMeasure& m1, const OMeasure& m2) {
    std::vector<OObject> r1 = m1.items, r2;
    for (const OObject& o : m2.items) {
        auto it = std::find(r1.begin(), r1.end(), o);
        if (it != r1.end())
            r1.erase(it);
        else
            r2.push_back(o);
    }
    if (r1.empty()) return false;
    for (const OObject& o2 : r2) {
        bool dominated = false;
        for (const OObject& o1 : r1)
            if (o_greater(o1, o2)) {
                dominated = true;
                break;
            }
        if (!dominated) return false;
    }
    return true;
}
inline bool mul_less(const OMeasure& m1, const OMeasure& m2) { return mul_greater(m2, m1); }
inline bool mul_geq(const OMeasure& m1, const OMeasure& m2) {
    return m1 == m2 || mul_greater(m1, m2);
}

// CL(t): the cuts-level measure.  Pure terms measure [].
inline OMeasure cl_measure(const Term& t) {
    switch (t.kind()) {
        case TermKind::Var:
        case TermKind::Hole:
            return {};
        case TermKind::Abs:
            return cl_measure(t.body());
        case TermKind::App: {
            OMeasure m = cl_measure(t.fun());
            m.join(cl_measure(t.arg()));
            return m;
        }
        case TermKind::Sub: {
            size_t lv = level(t.body(), t.name());
            OMeasure m = cl_measure(t.body());
            m.join(cl_measure(t.content()).scaled(lv + 1));
            m.add(OObject::a(lv + 1, term_size(t.content())));
            return m;
        }
        case TermKind::Dist: {
            size_t lv = level(t.body(), t.name());
            OMeasure m = cl_measure(t.body());
            m.join(cl_measure(t.content()).scaled(lv));
            m.add(OObject::b(lv));
            return m;
        }
    }
    return {};
}

}  // namespace lambdar
