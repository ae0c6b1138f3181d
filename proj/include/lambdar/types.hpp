#pragma once

// The non-idempotent intersection type system: multi-types, environments,
// derivation trees with validity checking, and the weighted derivation
// measures that bound evaluation lengths.

#include <map>
#include <numeric>

#include "lambdar/grammar.hpp"
#include "lambdar/measure.hpp"
#include "lambdar/syntax.hpp"

namespace lambdar {

struct DerivError : std::runtime_error {
    explicit DerivError(const std::string& m) : std::runtime_error(m) {}
};
struct NotANormalForm : std::runtime_error {
    explicit NotANormalForm(const std::string& m) : std::runtime_error(m) {}
};
struct SliceMismatch : std::runtime_error {
    explicit SliceMismatch(const std::string& m) : std::runtime_error(m) {}
};
struct PartitionMismatch : std::runtime_error {
    explicit PartitionMismatch(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// Types.  sigma ::= a | alpha | M -> sigma, with M a finite multiset.

class IType;
using ITypePtr = std::shared_ptr<const IType>;
using MultiType = std::vector<ITypePtr>;  // kept sorted by type_cmp

class IType {
public:
    enum class K { Answer, Base, Arrow };
    K k;
    Name base;      // Base
    MultiType dom;  // Arrow
    ITypePtr cod;   // Arrow

    static ITypePtr answer() {
        static ITypePtr a = std::make_shared<IType>(IType{K::Answer, {}, {}, nullptr});
        return a;
    }
    static ITypePtr base_type(Name n) {
        return std::make_shared<IType>(IType{K::Base, std::move(n), {}, nullptr});
    }
    static ITypePtr arrow(MultiType dom, ITypePtr cod);
};

inline int type_cmp(const ITypePtr& x, const ITypePtr& y);

inline int multi_cmp(const MultiType& x, const MultiType& y) {
    if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
    for (size_t i = 0; i < x.size(); ++i)
        if (int c = type_cmp(x[i], y[i])) return c;
    return 0;
}

inline int type_cmp(const ITypePtr& x, const ITypePtr& y) {
    if (x == y) return 0;
    if (x->k != y->k) return x->k < y->k ? -1 : 1;
    switch (x->k) {
        case IType::K::Answer: return 0;
        case IType::K::Base: return x->base.compare(y->base) < 0 ? -1
                                    : x->base == y->base       ? 0
                                                               : 1;
        case IType::K::Arrow: {
            if (int c = multi_cmp(x->dom, y->dom)) return c;
            return type_cmp(x->cod, y->cod);
        }
    }
    return 0;
}

inline bool type_eq(const ITypePtr& x, const ITypePtr& y) { return type_cmp(x, y) == 0; }

inline void multi_sort(MultiType& m) {
    std::sort(m.begin(), m.end(),
              [](const ITypePtr& a, const ITypePtr& b) { return type_cmp(a, b) < 0; });
}

inline ITypePtr IType::arrow(MultiType dom, ITypePtr cod) {
    multi_sort(dom);
    return std::make_shared<IType>(IType{K::Arrow, {}, std::move(dom), std::move(cod)});
}

inline MultiType multi_union(MultiType a, const MultiType& b) {
    a.insert(a.end(), b.begin(), b.end());
    multi_sort(a);
    return a;
}

inline bool multi_eq(const MultiType& a, const MultiType& b) { return multi_cmp(a, b) == 0; }

// a \ b, failing if b is not included in a
inline std::optional<MultiType> multi_diff(MultiType a, const MultiType& b) {
    for (const ITypePtr& t : b) {
        auto it = std::find_if(a.begin(), a.end(),
                               [&](const ITypePtr& x) { return type_eq(x, t); });
        if (it == a.end()) return std::nullopt;
        a.erase(it);
    }
    return a;
}

inline std::string type_str(const ITypePtr& t);

inline std::string multi_str(const MultiType& m) {
    std::string s = "[";
    for (size_t i = 0; i < m.size(); ++i) {
        if (i) s += ", ";
        s += type_str(m[i]);
    }
    return s + "]";
}

inline std::string type_str(const ITypePtr& t) {
    switch (t->k) {
        case IType::K::Answer: return "a";
        case IType::K::Base: return t->base;
        case IType::K::Arrow: return multi_str(t->dom) + " -> " + type_str(t->cod);
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Environments: finite maps to multi-types; absent = [].

using Env = std::map<Name, MultiType>;

inline Env env_union(Env a, const Env& b) {
    for (auto& [k, v] : b) {
        auto& slot = a[k];
        slot = multi_union(slot, v);
    }
    for (auto it = a.begin(); it != a.end();)
        it = it->second.empty() ? a.erase(it) : std::next(it);
    return a;
}

inline MultiType env_get(const Env& e, const Name& x) {
    auto it = e.find(x);
    return it == e.end() ? MultiType{} : it->second;
}

inline Env env_erase(Env e, const Name& x) {
    e.erase(x);
    return e;
}

inline bool env_eq(const Env& a, const Env& b) {
    if (a.size() != b.size()) return false;
    for (auto& [k, v] : a) {
        auto it = b.find(k);
        if (it == b.end() || !multi_eq(v, it->second)) return false;
    }
    return true;
}

inline std::string env_str(const Env& e) {
    std::string s;
    for (auto& [k, v] : e) {
        if (!s.empty()) s += ", ";
        s += k + " : " + multi_str(v);
    }
    return s.empty() ? "{}" : s;
}

// ---------------------------------------------------------------------------
// Derivations.

enum class TRule { AX, ABS, ANS, APP, CUT, MANY };

inline const char* trule_name(TRule r) {
    switch (r) {
        case TRule::AX: return "AX";
        case TRule::ABS: return "ABS";
        case TRule::ANS: return "ANS";
        case TRule::APP: return "APP";
        case TRule::CUT: return "CUT";
        case TRule::MANY: return "MANY";
    }
    return "?";
}

class Deriv;
using DerivPtr = std::shared_ptr<const Deriv>;

class Deriv {
public:
    TRule rule;
    std::vector<DerivPtr> premises;
    Env env;
    Term subject;
    ITypePtr type;    // all rules except MANY
    MultiType multi;  // MANY

    bool is_many() const { return rule == TRule::MANY; }
};

inline DerivPtr mk(Deriv d) { return std::make_shared<const Deriv>(std::move(d)); }

inline DerivPtr dv_ax(const Name& x, ITypePtr t) {
    Deriv d;
    d.rule = TRule::AX;
    d.subject = Term::var(x);
    d.env = {{x, {t}}};
    d.type = std::move(t);
    return mk(std::move(d));
}

inline DerivPtr dv_abs(const DerivPtr& body, const Name& binder) {
    if (body->is_many()) throw DerivError("ABS premise cannot be MANY");
    Deriv d;
    d.rule = TRule::ABS;
    d.premises = {body};
    d.subject = Term::abs(binder, body->subject);
    d.env = env_erase(body->env, binder);
    d.type = IType::arrow(env_get(body->env, binder), body->type);
    return mk(std::move(d));
}

inline DerivPtr dv_ans(const Term& abs_subject) {
    if (!abs_subject.is_abs()) throw DerivError("ANS subject must be an abstraction");
    Deriv d;
    d.rule = TRule::ANS;
    d.subject = abs_subject;
    d.type = IType::answer();
    return mk(std::move(d));
}

inline DerivPtr dv_many(std::vector<DerivPtr> premises, const Term& subject) {
    Deriv d;
    d.rule = TRule::MANY;
    d.subject = subject;
    for (const DerivPtr& p : premises) {
        if (p->is_many()) throw DerivError("MANY premise cannot be MANY");
        if (!alpha_eq(p->subject, subject))
            throw DerivError("MANY subjects disagree: premise '" + print(p->subject) +
                             "' vs '" + print(subject) + "'");
        d.env = env_union(d.env, p->env);
        d.multi.push_back(p->type);
    }
    multi_sort(d.multi);
    d.premises = std::move(premises);
    return mk(std::move(d));
}

inline DerivPtr dv_app(const DerivPtr& fn, const DerivPtr& arg_many) {
    if (fn->is_many() || !arg_many->is_many()) throw DerivError("APP premise shapes");
    if (fn->type->k != IType::K::Arrow) throw DerivError("APP function type is not an arrow");
    if (!multi_eq(fn->type->dom, arg_many->multi))
        throw DerivError("APP domain mismatch: " + multi_str(fn->type->dom) + " vs " +
                         multi_str(arg_many->multi));
    Deriv d;
    d.rule = TRule::APP;
    d.premises = {fn, arg_many};
    d.subject = Term::app(fn->subject, arg_many->subject);
    d.env = env_union(fn->env, arg_many->env);
    d.type = fn->type->cod;
    return mk(std::move(d));
}

inline DerivPtr dv_cut(const DerivPtr& body, const Name& binder, const DerivPtr& content_many,
                       TermKind kind) {
    if (body->is_many() || !content_many->is_many()) throw DerivError("CUT premise shapes");
    if (!multi_eq(env_get(body->env, binder), content_many->multi))
        throw DerivError("CUT binder multiset mismatch: " +
                         multi_str(env_get(body->env, binder)) + " vs " +
                         multi_str(content_many->multi));
    Deriv d;
    d.rule = TRule::CUT;
    d.premises = {body, content_many};
    d.subject = Term::cut(body->subject, binder, content_many->subject, kind);
    d.env = env_union(env_erase(body->env, binder), content_many->env);
    d.type = body->type;
    return mk(std::move(d));
}

// Rebuild a node from (possibly replaced) premises.  The subject of shielded
// nodes (ANS, empty MANY) can be replaced explicitly.
inline DerivPtr dv_rebuild(const DerivPtr& d, std::vector<DerivPtr> premises,
                           std::optional<Term> subject = std::nullopt) {
    switch (d->rule) {
        case TRule::AX: return d;
        case TRule::ANS: return subject ? dv_ans(*subject) : d;
        case TRule::ABS: return dv_abs(premises.at(0), d->subject.name());
        case TRule::APP: return dv_app(premises.at(0), premises.at(1));
        case TRule::CUT:
            return dv_cut(premises.at(0), d->subject.name(), premises.at(1),
                          d->subject.kind());
        case TRule::MANY: {
            Term subj = subject ? *subject
                                : (premises.empty() ? d->subject : premises[0]->subject);
            return dv_many(std::move(premises), subj);
        }
    }
    throw DerivError("unreachable");
}

// ---------------------------------------------------------------------------
// Validity: every node must locally instantiate its rule.

inline bool check_derivation(const DerivPtr& d, std::string* diag = nullptr) {
    auto fail = [&](const std::string& m) {
        if (diag) *diag = m;
        return false;
    };
    switch (d->rule) {
        case TRule::AX: {
            if (!d->subject.is_var()) return fail("AX subject is not a variable");
            Env want{{d->subject.name(), {d->type}}};
            if (!env_eq(d->env, want)) return fail("AX environment is not the singleton");
            return true;
        }
        case TRule::ANS: {
            if (!d->subject.is_abs()) return fail("ANS subject is not an abstraction");
            if (!d->env.empty()) return fail("ANS environment is not empty");
            if (d->type->k != IType::K::Answer) return fail("ANS type is not the constant");
            return true;
        }
        case TRule::ABS: {
            if (d->premises.size() != 1) return fail("ABS premise count");
            const DerivPtr& b = d->premises[0];
            if (!check_derivation(b, diag)) return false;
            if (!d->subject.is_abs() || !alpha_eq(d->subject.body(), b->subject))
                return fail("ABS subject mismatch");
            if (d->type->k != IType::K::Arrow) return fail("ABS type is not an arrow");
            if (!multi_eq(d->type->dom, env_get(b->env, d->subject.name())))
                return fail("ABS domain mismatch");
            if (!type_eq(d->type->cod, b->type)) return fail("ABS codomain mismatch");
            if (!env_eq(d->env, env_erase(b->env, d->subject.name())))
                return fail("ABS environment mismatch");
            return true;
        }
        case TRule::APP: {
            if (d->premises.size() != 2) return fail("APP premise count");
            const DerivPtr& f = d->premises[0];
            const DerivPtr& a = d->premises[1];
            if (!check_derivation(f, diag) || !check_derivation(a, diag)) return false;
            if (!a->is_many()) return fail("APP argument premise is not MANY");
            if (!d->subject.is_app() || !alpha_eq(d->subject.fun(), f->subject) ||
                !alpha_eq(d->subject.arg(), a->subject))
                return fail("APP subject mismatch");
            if (f->type->k != IType::K::Arrow || !multi_eq(f->type->dom, a->multi))
                return fail("APP domain mismatch");
            if (!type_eq(d->type, f->type->cod)) return fail("APP type mismatch");
            if (!env_eq(d->env, env_union(f->env, a->env))) return fail("APP env mismatch");
            return true;
        }
        case TRule::CUT: {
            if (d->premises.size() != 2) return fail("CUT premise count");
            const DerivPtr& b = d->premises[0];
            const DerivPtr& c = d->premises[1];
            if (!check_derivation(b, diag) || !check_derivation(c, diag)) return false;
            if (!c->is_many()) return fail("CUT content premise is not MANY");
            if (!d->subject.is_cut() || !alpha_eq(d->subject.body(), b->subject) ||
                !alpha_eq(d->subject.content(), c->subject))
                return fail("CUT subject mismatch");
            if (!multi_eq(env_get(b->env, d->subject.name()), c->multi))
                return fail("CUT binder multiset mismatch");
            if (!type_eq(d->type, b->type)) return fail("CUT type mismatch");
            if (!env_eq(d->env, env_union(env_erase(b->env, d->subject.name()), c->env)))
                return fail("CUT env mismatch");
            return true;
        }
        case TRule::MANY: {
            MultiType types;
            Env env;
            for (const DerivPtr& p : d->premises) {
                if (!check_derivation(p, diag)) return false;
                if (p->is_many()) return fail("MANY premise is MANY");
                if (!alpha_eq(p->subject, d->subject)) return fail("MANY subject mismatch");
                types.push_back(p->type);
                env = env_union(env, p->env);
            }
            multi_sort(types);
            if (!multi_eq(types, d->multi)) return fail("MANY multiset mismatch");
            if (!env_eq(env, d->env)) return fail("MANY env mismatch");
            return true;
        }
    }
    return fail("unknown rule");
}

// ---------------------------------------------------------------------------
// Measures.

struct Triple {
    long long a = 0, b = 0, c = 0;
    friend Triple operator+(const Triple& x, const Triple& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c};
    }
    friend Triple operator-(const Triple& x, const Triple& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c};
    }
    friend bool operator==(const Triple& x, const Triple& y) {
        return x.a == y.a && x.b == y.b && x.c == y.c;
    }
    friend bool operator<(const Triple& x, const Triple& y) {
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.c < y.c;
    }
    friend bool operator>(const Triple& x, const Triple& y) { return y < x; }
    friend bool operator<=(const Triple& x, const Triple& y) { return !(y < x); }
    friend bool operator>=(const Triple& x, const Triple& y) { return !(x < y); }
    std::string str() const {
        return "(" + std::to_string(a) + ", " + std::to_string(b) + ", " + std::to_string(c) +
               ")";
    }
};

// Count of ABS, APP and ANS nodes.
inline size_t deriv_size(const DerivPtr& d) {
    size_t n = (d->rule == TRule::ABS || d->rule == TRule::APP || d->rule == TRule::ANS) ? 1
                                                                                         : 0;
    for (const DerivPtr& p : d->premises) n += deriv_size(p);
    return n;
}

// Weighted derivation level M(Phi, m); cut contents weigh their premise by
// the binder's level plus one for substitutions.
inline Triple measure_m(const DerivPtr& d, long long m) {
    switch (d->rule) {
        case TRule::AX: return {0, 0, 1};
        case TRule::ANS: return {1, m, 0};
        case TRule::ABS: return measure_m(d->premises[0], m) + Triple{1, m, 0};
        case TRule::APP:
            return measure_m(d->premises[0], m) + measure_m(d->premises[1], m) +
                   Triple{1, m, 0};
        case TRule::CUT: {
            long long shift = static_cast<long long>(
                level(d->premises[0]->subject, d->subject.name()));
            long long es = d->subject.is_sub() ? 1 : 0;
            return measure_m(d->premises[0], m) + measure_m(d->premises[1], m + shift + es);
        }
        case TRule::MANY: {
            Triple t;
            for (const DerivPtr& p : d->premises) t = t + measure_m(p, m);
            return t;
        }
    }
    return {};
}

inline Triple measure_d(const DerivPtr& d) { return measure_m(d, 1); }

// ---------------------------------------------------------------------------
// Split: partition a MANY derivation along a partition of its multiset.

inline std::vector<DerivPtr> split_many(const DerivPtr& many,
                                        const std::vector<MultiType>& parts) {
    if (!many->is_many()) throw DerivError("split needs a MANY derivation");
    MultiType total;
    for (const MultiType& p : parts) total = multi_union(total, p);
    if (!multi_eq(total, many->multi))
        throw PartitionMismatch("parts do not sum to the multiset");
    std::vector<DerivPtr> pool = many->premises;
    std::vector<DerivPtr> out;
    for (const MultiType& part : parts) {
        std::vector<DerivPtr> chosen;
        for (const ITypePtr& t : part) {
            auto it = std::find_if(pool.begin(), pool.end(), [&](const DerivPtr& p) {
                return type_eq(p->type, t);
            });
            if (it == pool.end()) throw PartitionMismatch("no premise of the requested type");
            chosen.push_back(*it);
            pool.erase(it);
        }
        out.push_back(dv_many(std::move(chosen), many->subject));
    }
    return out;
}

// Draw premises matching a multiset out of a mutable pool.
inline std::vector<DerivPtr> draw_by_types(std::vector<DerivPtr>& pool, const MultiType& want,
                                           const char* what) {
    std::vector<DerivPtr> out;
    for (const ITypePtr& t : want) {
        auto it = std::find_if(pool.begin(), pool.end(),
                               [&](const DerivPtr& p) { return type_eq(p->type, t); });
        if (it == pool.end())
            throw SliceMismatch(std::string(what) + ": missing premise of type " + type_str(t));
        out.push_back(*it);
        pool.erase(it);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Typing of normal forms (answers at the constant, neutrals at any type).

inline DerivPtr type_neutral(const Term& t, const ITypePtr& target);

inline DerivPtr type_normal_form(const Term& t, const ITypePtr& target) {
    if (!in_ne(t)) throw NotANormalForm("not a weak normal form");
    if (is_answer(t)) {
        auto [core, cuts] = peel_list(t);
        DerivPtr d = dv_ans(core);
        for (const Cut& c : cuts)
            d = dv_cut(d, c.binder, dv_many({}, c.content), c.kind);
        return d;
    }
    return type_neutral(t, target);
}

inline DerivPtr type_neutral(const Term& t, const ITypePtr& target) {
    switch (t.kind()) {
        case TermKind::Var:
            return dv_ax(t.name(), target);
        case TermKind::App: {
            DerivPtr f = type_neutral(t.fun(), IType::arrow({}, target));
            return dv_app(f, dv_many({}, t.arg()));
        }
        case TermKind::Sub:
        case TermKind::Dist: {
            DerivPtr b = type_neutral(t.body(), target);
            MultiType m = env_get(b->env, t.name());
            std::vector<DerivPtr> cs;
            for (const ITypePtr& s : m) cs.push_back(type_neutral(t.content(), s));
            return dv_cut(b, t.name(), dv_many(std::move(cs), t.content()), t.kind());
        }
        default:
            throw NotANormalForm("neutral term expected");
    }
}

// ---------------------------------------------------------------------------
// Partial substitution and anti-substitution on derivations.

namespace detail {

// Replace the variable occurrence at `path` by `u`, drawing typed premises
// for u out of `pool`.  Returns the rewritten derivation.
inline DerivPtr psubst_rec(const DerivPtr& d, const Path& path, size_t i, const Term& u,
                           std::vector<DerivPtr>& pool) {
    if (d->is_many()) {
        std::vector<DerivPtr> ps;
        for (const DerivPtr& p : d->premises) ps.push_back(psubst_rec(p, path, i, u, pool));
        Term subj = replace_at(d->subject, Path(path.begin() + i, path.end()), u);
        return dv_many(std::move(ps), subj);
    }
    if (i == path.size()) {
        if (d->rule != TRule::AX) throw DerivError("substitution hole is not an axiom");
        return draw_by_types(pool, {d->type}, "partial substitution")[0];
    }
    Sel s = path[i];
    switch (d->rule) {
        case TRule::ABS:
            if (s != Sel::AbsBody) throw InvalidPath("ABS expects a body step");
            return dv_abs(psubst_rec(d->premises[0], path, i + 1, u, pool),
                          d->subject.name());
        case TRule::APP:
            if (s == Sel::AppFun)
                return dv_app(psubst_rec(d->premises[0], path, i + 1, u, pool),
                              d->premises[1]);
            if (s == Sel::AppArg)
                return dv_app(d->premises[0], psubst_rec(d->premises[1], path, i + 1, u, pool));
            throw InvalidPath("APP expects a function or argument step");
        case TRule::CUT:
            if (s == Sel::CutBody)
                return dv_cut(psubst_rec(d->premises[0], path, i + 1, u, pool),
                              d->subject.name(), d->premises[1], d->subject.kind());
            if (s == Sel::CutContent)
                return dv_cut(d->premises[0], d->subject.name(),
                              psubst_rec(d->premises[1], path, i + 1, u, pool),
                              d->subject.kind());
            throw InvalidPath("CUT expects a body or content step");
        case TRule::ANS: {
            Term subj = replace_at(d->subject, Path(path.begin() + i, path.end()), u);
            return dv_ans(subj);
        }
        default:
            throw InvalidPath("cannot descend through this rule");
    }
}

// Extract the subderivations typing the subterm at `path`, replacing them
// by axioms on x.  Extracted premises are appended to `out`.
inline DerivPtr antisubst_rec(const DerivPtr& d, const Path& path, size_t i, const Name& x,
                              std::vector<DerivPtr>& out) {
    if (d->is_many()) {
        std::vector<DerivPtr> ps;
        for (const DerivPtr& p : d->premises) ps.push_back(antisubst_rec(p, path, i, x, out));
        Term subj = replace_at(d->subject, Path(path.begin() + i, path.end()), Term::var(x));
        return dv_many(std::move(ps), subj);
    }
    if (i == path.size()) {
        out.push_back(d);
        return dv_ax(x, d->type);
    }
    Sel s = path[i];
    switch (d->rule) {
        case TRule::ABS:
            if (s != Sel::AbsBody) throw InvalidPath("ABS expects a body step");
            return dv_abs(antisubst_rec(d->premises[0], path, i + 1, x, out),
                          d->subject.name());
        case TRule::APP:
            if (s == Sel::AppFun)
                return dv_app(antisubst_rec(d->premises[0], path, i + 1, x, out),
                              d->premises[1]);
            if (s == Sel::AppArg)
                return dv_app(d->premises[0],
                              antisubst_rec(d->premises[1], path, i + 1, x, out));
            throw InvalidPath("APP expects a function or argument step");
        case TRule::CUT:
            if (s == Sel::CutBody)
                return dv_cut(antisubst_rec(d->premises[0], path, i + 1, x, out),
                              d->subject.name(), d->premises[1], d->subject.kind());
            if (s == Sel::CutContent)
                return dv_cut(d->premises[0], d->subject.name(),
                              antisubst_rec(d->premises[1], path, i + 1, x, out),
                              d->subject.kind());
            throw InvalidPath("CUT expects a body or content step");
        case TRule::ANS: {
            Term subj = replace_at(d->subject, Path(path.begin() + i, path.end()),
                                   Term::var(x));
            return dv_ans(subj);
        }
        default:
            throw InvalidPath("cannot descend through this rule");
    }
}

}  // namespace detail

// Partial substitution on derivations: plug u (typed by `content_many`) into the
// variable occurrence at `path`.  The measure identity is asserted.
inline DerivPtr partial_subst_typing(const DerivPtr& d, const DerivPtr& content_many,
                                     const Path& path) {
    if (!content_many->is_many()) throw DerivError("content premise must be MANY");
    Term at = subterm_at(d->subject, path);
    if (!at.is_var()) throw DerivError("path does not address a variable occurrence");
    const Term& u = content_many->subject;
    NameSet fvu = free_vars(u);
    for (const Name& b : binders_on_path(d->subject, path))
        if (fvu.count(b)) throw CaptureError("plugging would capture " + b);
    std::vector<DerivPtr> pool = content_many->premises;
    long long hole_lv = static_cast<long long>(context_level(d->subject, path));
    Triple before = measure_m(d, 1);
    Triple content = measure_m(content_many, 1 + hole_lv);
    DerivPtr out = detail::psubst_rec(d, path, 0, u, pool);
    if (!pool.empty()) throw SliceMismatch("unused content premises");
    Triple after = measure_m(out, 1);
    Triple expect = before + content - Triple{0, 0, (long long)content_many->premises.size()};
    if (!(after == expect))
        throw DerivError("partial substitution measure identity failed: " + after.str() +
                         " vs " + expect.str());
    return out;
}

// Inverse: carve the occurrence at `path` out as a fresh variable x.
// Returns the context derivation and the extracted MANY for u.
inline std::pair<DerivPtr, DerivPtr> anti_subst_typing(const DerivPtr& d, const Path& path,
                                                       const Name& x) {
    Term u = subterm_at(d->subject, path);
    if (is_free_in(x, u)) throw DerivError("chosen variable occurs in the extracted term");
    std::vector<DerivPtr> out;
    DerivPtr ctx = detail::antisubst_rec(d, path, 0, x, out);
    return {ctx, dv_many(std::move(out), u)};
}

// Multi-occurrence anti-substitution (full meta-substitution inverse).
// The extracted subterm is read off the derivation itself: renaming during
// the forward step may have left the subject an alpha-variant of the
// recorded witness, and local names are the authoritative ones.
inline std::pair<DerivPtr, DerivPtr> anti_subst_all(const DerivPtr& d,
                                                    const std::vector<Path>& occurrences,
                                                    const Name& x, const Term& u) {
    Term content = occurrences.empty() ? u : subterm_at(d->subject, occurrences.front());
    std::vector<DerivPtr> extracted;
    DerivPtr cur = d;
    for (const Path& p : occurrences) cur = detail::antisubst_rec(cur, p, 0, x, extracted);
    return {cur, dv_many(std::move(extracted), content)};
}

}  // namespace lambdar
