#pragma once

// Terms of a lambda calculus with explicit substitutions t[x/u] and
// explicit distributors t[x//\y.u].  Terms are immutable values built
// over shared nodes; every operation returns a fresh handle.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lambdar {

using Name = std::string;
using NameSet = std::set<Name>;

enum class TermKind { Var, Abs, App, Sub, Dist, Hole };

class Term {
public:
    struct Node {
        TermKind kind;
        Name name;                       // Var: variable; Abs/Sub/Dist: binder; Hole: index
        std::shared_ptr<const Node> a;   // Abs body, App fun, cut body
        std::shared_ptr<const Node> b;   // App arg, cut content
    };
    using Ptr = std::shared_ptr<const Node>;

    Term() = default;
    explicit Term(Ptr p) : p_(std::move(p)) {}

    static Term var(Name x) { return mk({TermKind::Var, std::move(x), nullptr, nullptr}); }
    static Term abs(Name x, const Term& body) {
        return mk({TermKind::Abs, std::move(x), body.p_, nullptr});
    }
    static Term app(const Term& f, const Term& a) {
        return mk({TermKind::App, {}, f.p_, a.p_});
    }
    static Term sub(const Term& body, Name x, const Term& content) {
        return mk({TermKind::Sub, std::move(x), body.p_, content.p_});
    }
    // Distributor content must be an abstraction.
    static Term dist(const Term& body, Name x, const Term& content) {
        if (content.kind() != TermKind::Abs)
            throw std::invalid_argument("distributor content must be an abstraction");
        return mk({TermKind::Dist, std::move(x), body.p_, content.p_});
    }
    static Term hole(int index) {
        return mk({TermKind::Hole, std::to_string(index), nullptr, nullptr});
    }
    // Generic cut constructor; kind selects Sub or Dist.
    static Term cut(const Term& body, Name x, const Term& content, TermKind kind) {
        return kind == TermKind::Sub ? sub(body, std::move(x), content)
                                     : dist(body, std::move(x), content);
    }

    bool null() const { return !p_; }
    TermKind kind() const { return p_->kind; }
    const Name& name() const { return p_->name; }

    bool is_var() const { return kind() == TermKind::Var; }
    bool is_abs() const { return kind() == TermKind::Abs; }
    bool is_app() const { return kind() == TermKind::App; }
    bool is_sub() const { return kind() == TermKind::Sub; }
    bool is_dist() const { return kind() == TermKind::Dist; }
    bool is_cut() const { return is_sub() || is_dist(); }
    bool is_hole() const { return kind() == TermKind::Hole; }

    Term body() const { return Term(p_->a); }      // Abs/Sub/Dist
    Term fun() const { return Term(p_->a); }       // App
    Term arg() const { return Term(p_->b); }       // App
    Term content() const { return Term(p_->b); }   // Sub/Dist
    int hole_index() const { return std::stoi(p_->name); }

    // Structural identity of shared nodes (not alpha).
    bool same_node(const Term& o) const { return p_ == o.p_; }
    const Ptr& ptr() const { return p_; }

private:
    static Term mk(Node n) { return Term(std::make_shared<const Node>(std::move(n))); }
    Ptr p_;
};

// Child selectors; a Path is a sequence of selectors from the root.
// A Path into a term simultaneously denotes the context with a hole
// at the addressed position.
enum class Sel { AbsBody, AppFun, AppArg, CutBody, CutContent };

using Path = std::vector<Sel>;

struct CaptureError : std::runtime_error {
    explicit CaptureError(const std::string& m) : std::runtime_error(m) {}
};
struct InvalidPath : std::runtime_error {
    explicit InvalidPath(const std::string& m) : std::runtime_error(m) {}
};

inline Term child(const Term& t, Sel s) {
    switch (s) {
        case Sel::AbsBody:
            if (t.is_abs()) return t.body();
            break;
        case Sel::AppFun:
            if (t.is_app()) return t.fun();
            break;
        case Sel::AppArg:
            if (t.is_app()) return t.arg();
            break;
        case Sel::CutBody:
            if (t.is_cut()) return t.body();
            break;
        case Sel::CutContent:
            if (t.is_cut()) return t.content();
            break;
    }
    throw InvalidPath("selector does not match node kind");
}

inline Term subterm_at(Term t, const Path& path) {
    for (Sel s : path) t = child(t, s);
    return t;
}

inline Term replace_at(const Term& t, const Path& path, const Term& repl, size_t i = 0) {
    if (i == path.size()) return repl;
    Sel s = path[i];
    switch (s) {
        case Sel::AbsBody:
            return Term::abs(t.name(), replace_at(t.body(), path, repl, i + 1));
        case Sel::AppFun:
            return Term::app(replace_at(t.fun(), path, repl, i + 1), t.arg());
        case Sel::AppArg:
            return Term::app(t.fun(), replace_at(t.arg(), path, repl, i + 1));
        case Sel::CutBody:
            return Term::cut(replace_at(t.body(), path, repl, i + 1), t.name(), t.content(),
                             t.kind());
        case Sel::CutContent:
            return Term::cut(t.body(), t.name(), replace_at(t.content(), path, repl, i + 1),
                             t.kind());
    }
    throw InvalidPath("unreachable");
}

// Binders crossed on the way down to `path`, in root-to-leaf order.
inline std::vector<Name> binders_on_path(Term t, const Path& path) {
    std::vector<Name> out;
    for (Sel s : path) {
        if ((s == Sel::AbsBody && t.is_abs()) || (s == Sel::CutBody && t.is_cut()))
            out.push_back(t.name());
        t = child(t, s);
    }
    return out;
}

inline void collect_free(const Term& t, NameSet& bound, NameSet& out) {
    switch (t.kind()) {
        case TermKind::Var:
            if (!bound.count(t.name())) out.insert(t.name());
            return;
        case TermKind::Hole:
            return;
        case TermKind::Abs: {
            bool fresh = bound.insert(t.name()).second;
            collect_free(t.body(), bound, out);
            if (fresh) bound.erase(t.name());
            return;
        }
        case TermKind::App:
            collect_free(t.fun(), bound, out);
            collect_free(t.arg(), bound, out);
            return;
        case TermKind::Sub:
        case TermKind::Dist: {
            bool fresh = bound.insert(t.name()).second;
            collect_free(t.body(), bound, out);
            if (fresh) bound.erase(t.name());
            collect_free(t.content(), bound, out);
            return;
        }
    }
}

inline NameSet free_vars(const Term& t) {
    NameSet bound, out;
    collect_free(t, bound, out);
    return out;
}

inline bool is_free_in(const Name& x, const Term& t) {
    switch (t.kind()) {
        case TermKind::Var: return t.name() == x;
        case TermKind::Hole: return false;
        case TermKind::Abs: return t.name() != x && is_free_in(x, t.body());
        case TermKind::App: return is_free_in(x, t.fun()) || is_free_in(x, t.arg());
        case TermKind::Sub:
        case TermKind::Dist:
            return (t.name() != x && is_free_in(x, t.body())) || is_free_in(x, t.content());
    }
    return false;
}

// Number of free occurrences of x.
inline size_t occ_count(const Term& t, const Name& x) {
    switch (t.kind()) {
        case TermKind::Var: return t.name() == x ? 1 : 0;
        case TermKind::Hole: return 0;
        case TermKind::Abs: return t.name() == x ? 0 : occ_count(t.body(), x);
        case TermKind::App: return occ_count(t.fun(), x) + occ_count(t.arg(), x);
        case TermKind::Sub:
        case TermKind::Dist:
            return (t.name() == x ? 0 : occ_count(t.body(), x)) + occ_count(t.content(), x);
    }
    return 0;
}

// Node count, cuts included.
inline size_t term_size(const Term& t) {
    switch (t.kind()) {
        case TermKind::Var:
        case TermKind::Hole: return 1;
        case TermKind::Abs: return 1 + term_size(t.body());
        case TermKind::App: return 1 + term_size(t.fun()) + term_size(t.arg());
        case TermKind::Sub:
        case TermKind::Dist: return 1 + term_size(t.body()) + term_size(t.content());
    }
    return 0;
}

// Every name appearing in a term, free or binding.
inline void collect_all_names(const Term& t, NameSet& out) {
    switch (t.kind()) {
        case TermKind::Var:
            out.insert(t.name());
            return;
        case TermKind::Hole:
            return;
        case TermKind::Abs:
            out.insert(t.name());
            collect_all_names(t.body(), out);
            return;
        case TermKind::App:
            collect_all_names(t.fun(), out);
            collect_all_names(t.arg(), out);
            return;
        case TermKind::Sub:
        case TermKind::Dist:
            out.insert(t.name());
            collect_all_names(t.body(), out);
            collect_all_names(t.content(), out);
            return;
    }
}

inline NameSet all_names(const Term& t) {
    NameSet out;
    collect_all_names(t, out);
    return out;
}

// Deterministic supply of fresh names: hint with trailing digits stripped,
// then a strictly increasing numeric suffix.  Names already drawn are never
// reused, so distinct calls never collide.
class FreshSupply {
public:
    FreshSupply() = default;
    explicit FreshSupply(uint64_t seed) : counter_(seed ? seed : 1) {}

    Name fresh(const Name& hint, const NameSet& avoid) {
        Name base = strip(hint);
        for (;;) {
            Name cand = base + std::to_string(counter_++);
            if (!avoid.count(cand) && !used_.count(cand)) {
                used_.insert(cand);
                return cand;
            }
        }
    }
    void reserve(const NameSet& names) { used_.insert(names.begin(), names.end()); }

private:
    static Name strip(const Name& h) {
        size_t end = h.size();
        while (end > 1 && std::isdigit(static_cast<unsigned char>(h[end - 1]))) --end;
        Name base = h.substr(0, end);
        return base.empty() ? Name("v") : base;
    }
    uint64_t counter_ = 1;
    NameSet used_;
};

namespace detail {

inline Term subst_rec(const Term& t, const Name& x, const Term& u, const NameSet& fvu,
                      FreshSupply& supply, Path& here, std::vector<Path>* occs);

// Substitute in the body under t's binder (t is Abs/Sub/Dist, binder != x),
// renaming the binder when it would capture a free variable of u.
inline std::pair<Name, Term> subst_under_binder(const Term& t, const Name& x, const Term& u,
                                                const NameSet& fvu, FreshSupply& supply,
                                                Path& here, std::vector<Path>* occs,
                                                Sel bodySel) {
    Name b = t.name();
    Term body = t.body();
    if (fvu.count(b) && is_free_in(x, body)) {
        NameSet avoid = fvu;
        NameSet bound;
        collect_free(body, bound, avoid);
        avoid.insert(x);
        Name b2 = supply.fresh(b, avoid);
        Path sub;
        FreshSupply throwaway;  // target name is fresh, so no further renaming is triggered
        body = subst_rec(body, b, Term::var(b2), {b2}, throwaway, sub, nullptr);
        b = b2;
    }
    here.push_back(bodySel);
    Term body2 = subst_rec(body, x, u, fvu, supply, here, occs);
    here.pop_back();
    return {b, body2};
}

inline Term subst_rec(const Term& t, const Name& x, const Term& u, const NameSet& fvu,
                      FreshSupply& supply, Path& here, std::vector<Path>* occs) {
    switch (t.kind()) {
        case TermKind::Var:
            if (t.name() == x) {
                if (occs) occs->push_back(here);
                return u;
            }
            return t;
        case TermKind::Hole:
            return t;
        case TermKind::Abs: {
            if (t.name() == x) return t;
            auto [b, body] = subst_under_binder(t, x, u, fvu, supply, here, occs, Sel::AbsBody);
            return Term::abs(b, body);
        }
        case TermKind::App: {
            here.push_back(Sel::AppFun);
            Term f = subst_rec(t.fun(), x, u, fvu, supply, here, occs);
            here.back() = Sel::AppArg;
            Term a = subst_rec(t.arg(), x, u, fvu, supply, here, occs);
            here.pop_back();
            return Term::app(f, a);
        }
        case TermKind::Sub:
        case TermKind::Dist: {
            here.push_back(Sel::CutContent);
            Term c = subst_rec(t.content(), x, u, fvu, supply, here, occs);
            here.pop_back();
            if (t.name() == x) return Term::cut(t.body(), t.name(), c, t.kind());
            auto [b, body] = subst_under_binder(t, x, u, fvu, supply, here, occs, Sel::CutBody);
            return Term::cut(body, b, c, t.kind());
        }
    }
    return t;
}

}  // namespace detail

// Capture-avoiding meta-level substitution t{x/u}.  When `occurrences` is
// given, the paths of the replaced occurrences (in result coordinates) are
// appended to it.
inline Term subst_meta(const Term& t, const Name& x, const Term& u, FreshSupply& supply,
                       std::vector<Path>* occurrences = nullptr) {
    Path here;
    return detail::subst_rec(t, x, u, free_vars(u), supply, here, occurrences);
}

namespace detail {
inline bool alpha_rec(const Term& s, const Term& t, std::vector<std::pair<Name, Name>>& env) {
    if (s.kind() != t.kind()) return false;
    auto lookup = [&env](const Name& n, bool left) -> std::optional<size_t> {
        for (size_t i = env.size(); i-- > 0;) {
            const Name& key = left ? env[i].first : env[i].second;
            if (key == n) return i;
        }
        return std::nullopt;
    };
    switch (s.kind()) {
        case TermKind::Var: {
            auto i = lookup(s.name(), true), j = lookup(t.name(), false);
            if (i.has_value() != j.has_value()) return false;
            return i.has_value() ? *i == *j : s.name() == t.name();
        }
        case TermKind::Hole:
            return s.name() == t.name();
        case TermKind::Abs: {
            env.emplace_back(s.name(), t.name());
            bool ok = alpha_rec(s.body(), t.body(), env);
            env.pop_back();
            return ok;
        }
        case TermKind::App:
            return alpha_rec(s.fun(), t.fun(), env) && alpha_rec(s.arg(), t.arg(), env);
        case TermKind::Sub:
        case TermKind::Dist: {
            if (!alpha_rec(s.content(), t.content(), env)) return false;
            env.emplace_back(s.name(), t.name());
            bool ok = alpha_rec(s.body(), t.body(), env);
            env.pop_back();
            return ok;
        }
    }
    return false;
}
}  // namespace detail

inline bool alpha_eq(const Term& s, const Term& t) {
    std::vector<std::pair<Name, Name>> env;
    return detail::alpha_rec(s, t, env);
}

// Plugging a term into the hole of a context (term + path).  With
// capture_free set, plugging fails when a binder above the hole would
// capture a free variable of the filler.
inline Term plug(const Term& ctx, const Path& path, const Term& filler, bool capture_free) {
    if (capture_free) {
        NameSet fv = free_vars(filler);
        for (const Name& b : binders_on_path(ctx, path))
            if (fv.count(b)) throw CaptureError("binder " + b + " captures filler");
    }
    return replace_at(ctx, path, filler);
}

// One explicit cut, as peeled off a list context.
struct Cut {
    Name binder;
    Term content;
    TermKind kind;  // Sub or Dist
};

// Maximal decomposition t = L<inner> with inner not a cut.  Cuts are
// reported inner-to-outer (cuts[0] is closest to the core).
inline std::pair<Term, std::vector<Cut>> peel_list(const Term& t) {
    std::vector<Cut> cuts;
    Term cur = t;
    while (cur.is_cut()) {
        cuts.push_back({cur.name(), cur.content(), cur.kind()});
        cur = cur.body();
    }
    std::reverse(cuts.begin(), cuts.end());
    return {cur, cuts};
}

inline Term rebuild_list(Term core, const std::vector<Cut>& cuts) {
    for (const Cut& c : cuts) core = Term::cut(core, c.binder, c.content, c.kind);
    return core;
}

inline NameSet list_domain(const std::vector<Cut>& cuts) {
    NameSet out;
    for (const Cut& c : cuts) out.insert(c.binder);
    return out;
}

// Free variables of a list context: fv(L[x<u]) = fv(L)\{x} u fv(u),
// computed over the inner-to-outer cut list.
inline NameSet list_free_vars(const std::vector<Cut>& cuts) {
    NameSet fv;
    for (const Cut& c : cuts) {
        fv.erase(c.binder);
        NameSet bound;
        collect_free(c.content, bound, fv);
    }
    return fv;
}

}  // namespace lambdar
