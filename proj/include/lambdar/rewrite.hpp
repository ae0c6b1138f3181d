#pragma once

// The permutation rules, the replication rules at a distance, sub
// normalization, the unfolding projection and redex enumeration.

#include <functional>

#include "lambdar/measure.hpp"
#include "lambdar/oracle.hpp"
#include "lambdar/term.hpp"

namespace lambdar {

enum class RuleTag { Pi1, Pi2, Pi3, Pi4, DB, APP, DIST, ABS, VAR };

inline const char* rule_name(RuleTag r) {
    switch (r) {
        case RuleTag::Pi1: return "pi1";
        case RuleTag::Pi2: return "pi2";
        case RuleTag::Pi3: return "pi3";
        case RuleTag::Pi4: return "pi4";
        case RuleTag::DB: return "dB";
        case RuleTag::APP: return "app";
        case RuleTag::DIST: return "dist";
        case RuleTag::ABS: return "abs";
        case RuleTag::VAR: return "var";
    }
    return "?";
}

inline bool is_sub_rule(RuleTag r) {
    return r == RuleTag::APP || r == RuleTag::DIST || r == RuleTag::ABS || r == RuleTag::VAR;
}
inline bool is_pi_rule(RuleTag r) {
    return r == RuleTag::Pi1 || r == RuleTag::Pi2 || r == RuleTag::Pi3 || r == RuleTag::Pi4;
}

struct Redex {
    Path path;
    RuleTag rule;
};

struct InvalidRedex : std::runtime_error {
    explicit InvalidRedex(const std::string& m) : std::runtime_error(m) {}
};
struct InternalNonTermination : std::runtime_error {
    explicit InternalNonTermination(const std::string& m) : std::runtime_error(m) {}
};

// One fired step with enough witness data to replay it backwards
// (derivation expansion re-derives typing trees from these fields).
struct RewriteStep {
    RuleTag rule{};
    Path path;  // redex position in the source term
    Term after;  // whole term after the step

    Name binder;                     // cut binder (sub rules) or dB binder
    Term content;                    // cut content / dB argument before the step
    Term replaced;                   // term substituted for the binder (app/var/abs)
    std::vector<Path> occurrences;   // substitution sites, relative to the rewritten body
    size_t list_len = 0;             // cuts relocated outside
    std::vector<RewriteStep> inner;  // ABS: permutation steps inside the distributor body
};

// ---------------------------------------------------------------------------
// Permutation rules.
//
//   pi1:  \y.(t[x<u])   -> (\y.t)[x<u]    if y not free in u
//   pi2:  (t[x<u]) s    -> (t s)[x<u]     if x not free in s
//   pi3:  t (s[x<u])    -> (t s)[x<u]     if x not free in t
//   pi4:  t[x/(u[y<s])] -> t[x/u][y<s]    if y not free in t
//
// pi1 never fires at the content position of a distributor: that position
// is not a hole of the context grammar.

inline std::optional<RuleTag> match_pi_at(const Term& t, bool at_dist_content) {
    switch (t.kind()) {
        case TermKind::Abs:
            if (!at_dist_content && t.body().is_cut() && !is_free_in(t.name(), t.body().content()))
                return RuleTag::Pi1;
            return std::nullopt;
        case TermKind::App:
            if (t.fun().is_cut() && !is_free_in(t.fun().name(), t.arg())) return RuleTag::Pi2;
            if (t.arg().is_cut() && !is_free_in(t.arg().name(), t.fun())) return RuleTag::Pi3;
            return std::nullopt;
        case TermKind::Sub:
            if (t.content().is_cut() && !is_free_in(t.content().name(), t.body()))
                return RuleTag::Pi4;
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

// pi2 and pi3 can overlap on one application node; report both.
inline void match_pi_all(const Term& t, bool at_dist_content, std::vector<RuleTag>& out) {
    if (t.is_app()) {
        if (t.fun().is_cut() && !is_free_in(t.fun().name(), t.arg())) out.push_back(RuleTag::Pi2);
        if (t.arg().is_cut() && !is_free_in(t.arg().name(), t.fun())) out.push_back(RuleTag::Pi3);
        return;
    }
    if (auto r = match_pi_at(t, at_dist_content)) out.push_back(*r);
}

inline void walk_positions(const Term& t, Path& here, bool at_dist_content,
                           const std::function<void(const Term&, const Path&, bool)>& visit) {
    visit(t, here, at_dist_content);
    switch (t.kind()) {
        case TermKind::Abs:
            here.push_back(Sel::AbsBody);
            walk_positions(t.body(), here, false, visit);
            here.pop_back();
            break;
        case TermKind::App:
            here.push_back(Sel::AppFun);
            walk_positions(t.fun(), here, false, visit);
            here.back() = Sel::AppArg;
            walk_positions(t.arg(), here, false, visit);
            here.pop_back();
            break;
        case TermKind::Sub:
        case TermKind::Dist:
            here.push_back(Sel::CutBody);
            walk_positions(t.body(), here, false, visit);
            here.back() = Sel::CutContent;
            walk_positions(t.content(), here, t.is_dist(), visit);
            here.pop_back();
            break;
        default:
            break;
    }
}

inline std::vector<Redex> pi_redexes(const Term& t) {
    std::vector<Redex> out;
    Path root;
    walk_positions(t, root, false, [&](const Term& s, const Path& p, bool distc) {
        std::vector<RuleTag> rules;
        match_pi_all(s, distc, rules);
        for (RuleTag r : rules) out.push_back({p, r});
    });
    return out;
}

inline Term fire_pi_local(const Term& t, RuleTag rule) {
    switch (rule) {
        case RuleTag::Pi1: {
            Term c = t.body();
            if (!t.is_abs() || !c.is_cut() || is_free_in(t.name(), c.content()))
                throw InvalidRedex("pi1 shape mismatch");
            return Term::cut(Term::abs(t.name(), c.body()), c.name(), c.content(), c.kind());
        }
        case RuleTag::Pi2: {
            Term c = t.fun();
            if (!t.is_app() || !c.is_cut() || is_free_in(c.name(), t.arg()))
                throw InvalidRedex("pi2 shape mismatch");
            return Term::cut(Term::app(c.body(), t.arg()), c.name(), c.content(), c.kind());
        }
        case RuleTag::Pi3: {
            Term c = t.arg();
            if (!t.is_app() || !c.is_cut() || is_free_in(c.name(), t.fun()))
                throw InvalidRedex("pi3 shape mismatch");
            return Term::cut(Term::app(t.fun(), c.body()), c.name(), c.content(), c.kind());
        }
        case RuleTag::Pi4: {
            Term c = t.content();
            if (!t.is_sub() || !c.is_cut() || is_free_in(c.name(), t.body()))
                throw InvalidRedex("pi4 shape mismatch");
            return Term::cut(Term::sub(t.body(), t.name(), c.body()), c.name(), c.content(),
                             c.kind());
        }
        default:
            throw InvalidRedex("not a pi rule");
    }
}

// ---------------------------------------------------------------------------
// Replication rules at a distance.

namespace detail {

// Rename the binders of a peeled list that appear in `protect`, so the list
// can be relocated without capturing.  Renaming respects the scopes inside
// the list, including shadowed duplicate binders.
inline void rename_list_binders(Term& core, std::vector<Cut>& cuts, const NameSet& protect,
                                FreshSupply& supply) {
    for (size_t i = 0; i < cuts.size(); ++i) {
        const Name b = cuts[i].binder;
        if (!protect.count(b)) continue;
        NameSet avoid = protect;
        NameSet bound;
        collect_free(core, bound, avoid);
        for (const Cut& c : cuts) {
            avoid.insert(c.binder);
            collect_free(c.content, bound, avoid);
        }
        Name b2 = supply.fresh(b, avoid);
        // scope of cuts[i].binder: core + contents of inner cuts, up to the
        // innermost shadowing cut with the same name
        size_t start = 0;
        bool shadow = false;
        for (size_t j = i; j-- > 0;) {
            if (cuts[j].binder == b) {
                start = j;
                shadow = true;
                break;
            }
        }
        FreshSupply rename_supply;
        if (!shadow) core = subst_meta(core, b, Term::var(b2), rename_supply);
        for (size_t j = start; j < i; ++j)
            cuts[j].content = subst_meta(cuts[j].content, b, Term::var(b2), rename_supply);
        cuts[i].binder = b2;
    }
}

// Deterministic permutation normalization inside a term (leftmost-innermost),
// recording the steps.  Used for the abs-rule side condition.
inline std::optional<Redex> find_pi_innermost(const Term& t, Path& here, bool at_dist_content) {
    switch (t.kind()) {
        case TermKind::Abs: {
            here.push_back(Sel::AbsBody);
            if (auto r = find_pi_innermost(t.body(), here, false)) return r;
            here.pop_back();
            break;
        }
        case TermKind::App: {
            here.push_back(Sel::AppFun);
            if (auto r = find_pi_innermost(t.fun(), here, false)) return r;
            here.back() = Sel::AppArg;
            if (auto r = find_pi_innermost(t.arg(), here, false)) return r;
            here.pop_back();
            break;
        }
        case TermKind::Sub:
        case TermKind::Dist: {
            here.push_back(Sel::CutBody);
            if (auto r = find_pi_innermost(t.body(), here, false)) return r;
            here.back() = Sel::CutContent;
            if (auto r = find_pi_innermost(t.content(), here, t.is_dist())) return r;
            here.pop_back();
            break;
        }
        default:
            break;
    }
    if (auto rule = match_pi_at(t, at_dist_content)) return Redex{here, *rule};
    return std::nullopt;
}

inline Term pi_normalize(Term t, std::vector<RewriteStep>* steps = nullptr,
                         size_t fuel = 100000) {
    for (size_t i = 0; i < fuel; ++i) {
        Path here;
        auto r = find_pi_innermost(t, here, false);
        if (!r) return t;
        Term local = subterm_at(t, r->path);
        t = replace_at(t, r->path, fire_pi_local(local, r->rule));
        if (steps) {
            RewriteStep s;
            s.rule = r->rule;
            s.path = r->path;
            s.after = t;
            steps->push_back(std::move(s));
        }
    }
    throw InternalNonTermination("pi normalization exceeded fuel");
}

}  // namespace detail

// Does the abs rule apply to this distributor?  The body must permute to a
// list around a pure core whose cuts do not mention the bound variable.
inline bool abs_applicable(const Term& dist_node) {
    if (!dist_node.is_dist()) return false;
    Term lam = dist_node.content();
    Term body_nf = detail::pi_normalize(lam.body());
    auto [core, cuts] = peel_list(body_nf);
    return is_pure(core) && !list_free_vars(cuts).count(lam.name());
}

inline std::optional<RuleTag> match_r_at(const Term& t) {
    switch (t.kind()) {
        case TermKind::App:
            if (peel_list(t.fun()).first.is_abs()) return RuleTag::DB;
            return std::nullopt;
        case TermKind::Sub: {
            Term core = peel_list(t.content()).first;
            if (core.is_var()) return RuleTag::VAR;
            if (core.is_app()) return RuleTag::APP;
            if (core.is_abs()) return RuleTag::DIST;
            return std::nullopt;
        }
        case TermKind::Dist:
            if (abs_applicable(t)) return RuleTag::ABS;
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

// All replication redexes.  With `weak`, dB redexes under an abstraction
// (hence also inside distributor contents) are excluded.
inline std::vector<Redex> r_redexes(const Term& t, bool weak) {
    std::vector<Redex> out;
    Path root;
    walk_positions(t, root, false, [&](const Term& s, const Path& p, bool) {
        auto r = match_r_at(s);
        if (!r) return;
        if (weak && *r == RuleTag::DB &&
            std::find(p.begin(), p.end(), Sel::AbsBody) != p.end())
            return;
        out.push_back({p, *r});
    });
    return out;
}

namespace detail {

inline Term fire_r_local(const Term& t, RuleTag rule, FreshSupply& supply, RewriteStep& w) {
    switch (rule) {
        case RuleTag::DB: {
            if (!t.is_app()) throw InvalidRedex("dB needs an application");
            auto [core, cuts] = peel_list(t.fun());
            if (!core.is_abs()) throw InvalidRedex("dB function core is not an abstraction");
            Term arg = t.arg();
            // core stays an abstraction during renaming so its own binder
            // correctly shadows a like-named list binder
            rename_list_binders(core, cuts, free_vars(arg), supply);
            w.binder = core.name();
            w.content = arg;
            w.list_len = cuts.size();
            return rebuild_list(Term::sub(core.body(), core.name(), arg), cuts);
        }
        case RuleTag::APP: {
            if (!t.is_sub()) throw InvalidRedex("app needs a substitution");
            auto [core, cuts] = peel_list(t.content());
            if (!core.is_app()) throw InvalidRedex("app content core is not an application");
            Term body = t.body();
            NameSet protect = free_vars(body);
            protect.erase(t.name());
            rename_list_binders(core, cuts, protect, supply);
            NameSet avoid = protect;
            NameSet bound;
            collect_free(core, bound, avoid);
            Name y = supply.fresh(t.name(), avoid);
            avoid.insert(y);
            Name z = supply.fresh(t.name(), avoid);
            Term yz = Term::app(Term::var(y), Term::var(z));
            Term body2 = subst_meta(body, t.name(), yz, supply, &w.occurrences);
            w.binder = t.name();
            w.content = t.content();
            w.replaced = yz;
            w.list_len = cuts.size();
            Term inner = Term::sub(Term::sub(body2, y, core.fun()), z, core.arg());
            return rebuild_list(inner, cuts);
        }
        case RuleTag::VAR: {
            if (!t.is_sub()) throw InvalidRedex("var needs a substitution");
            auto [core, cuts] = peel_list(t.content());
            if (!core.is_var()) throw InvalidRedex("var content core is not a variable");
            Term body = t.body();
            NameSet protect = free_vars(body);
            protect.erase(t.name());
            rename_list_binders(core, cuts, protect, supply);
            Term body2 = subst_meta(body, t.name(), core, supply, &w.occurrences);
            w.binder = t.name();
            w.content = t.content();
            w.replaced = core;
            w.list_len = cuts.size();
            return rebuild_list(body2, cuts);
        }
        case RuleTag::DIST: {
            if (!t.is_sub()) throw InvalidRedex("dist needs a substitution");
            auto [core, cuts] = peel_list(t.content());
            if (!core.is_abs()) throw InvalidRedex("dist content core is not an abstraction");
            Term body = t.body();
            NameSet protect = free_vars(body);
            protect.erase(t.name());
            rename_list_binders(core, cuts, protect, supply);
            NameSet avoid = protect;
            NameSet bound;
            collect_free(core, bound, avoid);
            Name z = supply.fresh("z", avoid);
            Term content2 = Term::abs(core.name(), Term::sub(Term::var(z), z, core.body()));
            w.binder = t.name();
            w.content = t.content();
            w.replaced = Term::var(z);  // the fresh sharing variable
            w.list_len = cuts.size();
            return rebuild_list(Term::dist(body, t.name(), content2), cuts);
        }
        case RuleTag::ABS: {
            if (!t.is_dist()) throw InvalidRedex("abs needs a distributor");
            Term lam = t.content();
            std::vector<RewriteStep> pi_steps;
            Term body_nf = pi_normalize(lam.body(), &pi_steps);
            auto [core, cuts] = peel_list(body_nf);
            if (!is_pure(core)) throw InvalidRedex("distributor body does not split");
            if (list_free_vars(cuts).count(lam.name()))
                throw InvalidRedex("bound variable occurs in the residual list");
            Term body = t.body();
            NameSet protect = free_vars(body);
            protect.erase(t.name());
            protect.insert(lam.name());
            rename_list_binders(core, cuts, protect, supply);
            Term value = Term::abs(lam.name(), core);
            Term body2 = subst_meta(body, t.name(), value, supply, &w.occurrences);
            w.binder = t.name();
            w.content = t.content();
            w.replaced = value;
            w.list_len = cuts.size();
            w.inner = std::move(pi_steps);
            return rebuild_list(body2, cuts);
        }
        default:
            throw InvalidRedex("not a replication rule");
    }
}

}  // namespace detail

// Fire a redex; the returned step carries the replay witnesses.
inline RewriteStep fire(const Term& t, const Redex& r, FreshSupply& supply) {
    RewriteStep w;
    w.rule = r.rule;
    w.path = r.path;
    if (r.rule == RuleTag::Pi1 && !r.path.empty() && r.path.back() == Sel::CutContent) {
        Path parent(r.path.begin(), r.path.end() - 1);
        if (subterm_at(t, parent).is_dist())
            throw InvalidRedex("no permutation at a distributor content position");
    }
    Term local = subterm_at(t, r.path);
    Term local2 = is_pi_rule(r.rule) ? fire_pi_local(local, r.rule)
                                     : detail::fire_r_local(local, r.rule, supply, w);
    w.after = replace_at(t, r.path, local2);
    return w;
}

namespace detail {

inline std::optional<Redex> find_sub_innermost(const Term& t, Path& here) {
    switch (t.kind()) {
        case TermKind::Abs: {
            here.push_back(Sel::AbsBody);
            if (auto r = find_sub_innermost(t.body(), here)) return r;
            here.pop_back();
            break;
        }
        case TermKind::App: {
            here.push_back(Sel::AppFun);
            if (auto r = find_sub_innermost(t.fun(), here)) return r;
            here.back() = Sel::AppArg;
            if (auto r = find_sub_innermost(t.arg(), here)) return r;
            here.pop_back();
            break;
        }
        case TermKind::Sub:
        case TermKind::Dist: {
            here.push_back(Sel::CutBody);
            if (auto r = find_sub_innermost(t.body(), here)) return r;
            here.back() = Sel::CutContent;
            if (auto r = find_sub_innermost(t.content(), here)) return r;
            here.pop_back();
            break;
        }
        default:
            break;
    }
    auto rule = match_r_at(t);
    if (rule && is_sub_rule(*rule)) return Redex{here, *rule};
    return std::nullopt;
}

}  // namespace detail

// Normalize all explicit cuts away, leftmost-innermost.  Terminates on every
// term; the fuel only guards against implementation bugs.
inline Term sub_normalize(Term t, FreshSupply& supply, size_t fuel = 100000,
                          std::vector<RewriteStep>* steps = nullptr) {
    supply.reserve(all_names(t));
    for (size_t i = 0; i < fuel; ++i) {
        Path here;
        auto r = detail::find_sub_innermost(t, here);
        if (!r) return t;
        RewriteStep s = fire(t, *r, supply);
        t = s.after;
        if (steps) steps->push_back(std::move(s));
    }
    throw InternalNonTermination("sub normalization exceeded fuel");
}

// t-down: execute all cuts as meta-level substitutions.
inline Term unfold(const Term& t) {
    FreshSupply supply;
    auto rec = [&supply](auto&& self, const Term& u) -> Term {
        switch (u.kind()) {
            case TermKind::Var:
            case TermKind::Hole:
                return u;
            case TermKind::Abs:
                return Term::abs(u.name(), self(self, u.body()));
            case TermKind::App:
                return Term::app(self(self, u.fun()), self(self, u.arg()));
            case TermKind::Sub:
            case TermKind::Dist:
                return subst_meta(self(self, u.body()), u.name(), self(self, u.content()),
                                  supply);
        }
        return u;
    };
    return rec(rec, t);
}

// Simulate one beta step: a dB fire followed by sub steps, all recorded.
inline std::vector<RewriteStep> beta_expand_step(const Term& p, const Path& redex,
                                                 FreshSupply& supply) {
    if (!is_pure(p)) throw NotPure("beta_expand_step needs a pure term");
    Term sub = subterm_at(p, redex);
    if (!sub.is_app() || !sub.fun().is_abs()) throw NotABetaRedex("no beta redex at path");
    std::vector<RewriteStep> steps;
    supply.reserve(all_names(p));
    RewriteStep db = fire(p, {redex, RuleTag::DB}, supply);
    Term t = db.after;
    steps.push_back(std::move(db));
    sub_normalize(t, supply, 100000, &steps);
    return steps;
}

struct ConfluenceReport {
    bool violation = false;
    bool inconclusive = false;
    size_t endpoints = 0;
    std::string detail;
};

// Enumerate all R-sequences up to `depth`, project the endpoints and compare
// their bounded beta-normal forms.
inline ConfluenceReport confluence_probe(const Term& t, size_t depth, FreshSupply& supply,
                                         size_t beta_fuel = 1000) {
    std::vector<Term> frontier{t}, endpoints;
    for (size_t d = 0; d < depth; ++d) {
        std::vector<Term> next;
        for (const Term& cur : frontier) {
            auto rs = r_redexes(cur, false);
            if (rs.empty()) continue;
            for (const Redex& r : rs) next.push_back(fire(cur, r, supply).after);
        }
        endpoints.insert(endpoints.end(), frontier.begin(), frontier.end());
        frontier = std::move(next);
    }
    endpoints.insert(endpoints.end(), frontier.begin(), frontier.end());

    ConfluenceReport rep;
    rep.endpoints = endpoints.size();
    std::optional<std::string> canon;
    for (const Term& e : endpoints) {
        Term pure = sub_normalize(e, supply);
        auto nf = beta_normalize(pure, beta_fuel, supply);
        if (!nf) {
            rep.inconclusive = true;
            continue;
        }
        std::string c = alpha_canonical(*nf);
        if (!canon) {
            canon = c;
        } else if (*canon != c) {
            rep.violation = true;
            rep.detail = "distinct beta normal forms reached";
            return rep;
        }
    }
    return rep;
}

}  // namespace lambdar
