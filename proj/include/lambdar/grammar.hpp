#pragma once

// Membership checks for the restricted term grammars the strategies run
// on, plus needed free variables.

#include "lambdar/term.hpp"

namespace lambdar {

inline bool is_pure(const Term& t) {
    switch (t.kind()) {
        case TermKind::Var: return true;
        case TermKind::Hole: return false;
        case TermKind::Abs: return is_pure(t.body());
        case TermKind::App: return is_pure(t.fun()) && is_pure(t.arg());
        default: return false;
    }
}

// v ::= \x.p
inline bool is_value(const Term& t) { return t.is_abs() && is_pure(t.body()); }

// L<\x.t>
inline bool is_answer(const Term& t) { return peel_list(t).first.is_abs(); }

// Commutative list: contents are pure terms or linear cut values, and no
// binder occurs free in the part of the list inside it.
inline bool is_linear_cut_value(const Term& t);

inline bool is_commutative_list(const std::vector<Cut>& cuts) {
    NameSet inner_fv;
    for (const Cut& c : cuts) {  // inner to outer
        if (inner_fv.count(c.binder)) return false;
        bool ok = c.kind == TermKind::Sub ? is_pure(c.content) : is_linear_cut_value(c.content);
        if (!ok) return false;
        inner_fv.erase(c.binder);
        NameSet bound;
        collect_free(c.content, bound, inner_fv);
    }
    return true;
}

// T ::= \x.LL<p> where every list binder occurs exactly once in p
inline bool is_linear_cut_value(const Term& t) {
    if (!t.is_abs()) return false;
    auto [core, cuts] = peel_list(t.body());
    if (!is_pure(core)) return false;
    if (!is_commutative_list(cuts)) return false;
    for (const Cut& c : cuts)
        if (occ_count(core, c.binder) != 1) return false;
    return true;
}

// U ::= x | v | U U | U[x/U] | U[x//T]
inline bool in_u(const Term& t) {
    switch (t.kind()) {
        case TermKind::Var: return true;
        case TermKind::Hole: return false;
        case TermKind::Abs: return is_value(t);
        case TermKind::App: return in_u(t.fun()) && in_u(t.arg());
        case TermKind::Sub: return in_u(t.body()) && in_u(t.content());
        case TermKind::Dist: return in_u(t.body()) && is_linear_cut_value(t.content());
    }
    return false;
}

// Needed free variables: the ones whose value weak evaluation demands.
inline NameSet ndv(const Term& t) {
    switch (t.kind()) {
        case TermKind::Var: return {t.name()};
        case TermKind::Hole: return {};
        case TermKind::Abs: return {};
        case TermKind::App: return ndv(t.fun());
        case TermKind::Sub: {
            NameSet s = ndv(t.body());
            if (s.count(t.name())) {
                s.erase(t.name());
                NameSet u = ndv(t.content());
                s.insert(u.begin(), u.end());
            }
            return s;
        }
        case TermKind::Dist: {
            NameSet s = ndv(t.body());
            s.erase(t.name());
            return s;
        }
    }
    return {};
}

// name-normal forms: Na ::= \x.p | NaNeutral, NaNeutral ::= x | NaNeutral t
inline bool in_na_neutral(const Term& t) {
    if (t.is_var()) return true;
    return t.is_app() && in_na_neutral(t.fun());
}
inline bool in_na(const Term& t) { return is_value(t) || in_na_neutral(t); }

// flneed-normal forms: answers or neutral terms.  A cut around a neutral
// term keeps it neutral unless its binder is needed, in which case the cut
// must be a substitution whose content is neutral again.
inline bool in_ne_neutral(const Term& t) {
    switch (t.kind()) {
        case TermKind::Var: return true;
        case TermKind::App: return in_ne_neutral(t.fun());
        case TermKind::Sub:
        case TermKind::Dist: {
            if (!in_ne_neutral(t.body())) return false;
            if (!ndv(t.body()).count(t.name())) return true;
            return t.is_sub() && in_ne_neutral(t.content());
        }
        default: return false;
    }
}
inline bool in_ne(const Term& t) { return is_answer(t) || in_ne_neutral(t); }

enum class GrammarTag { Pure, U, T, LL, Value, Answer, Na, Ne };

inline bool check_grammar(const Term& t, GrammarTag which) {
    switch (which) {
        case GrammarTag::Pure: return is_pure(t);
        case GrammarTag::U: return in_u(t);
        case GrammarTag::T: return is_linear_cut_value(t);
        case GrammarTag::LL: return is_commutative_list(peel_list(t).second);
        case GrammarTag::Value: return is_value(t);
        case GrammarTag::Answer: return is_answer(t);
        case GrammarTag::Na: return in_na(t);
        case GrammarTag::Ne: return in_ne(t);
    }
    return false;
}

}  // namespace lambdar
