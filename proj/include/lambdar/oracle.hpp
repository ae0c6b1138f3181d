#pragma once

// Independent pure lambda-calculus reference semantics and random term
// generators, used to cross-check the cut-based engine.

#include <deque>
#include <random>

#include "lambdar/grammar.hpp"
#include "lambdar/term.hpp"

namespace lambdar {

struct NotABetaRedex : std::runtime_error {
    explicit NotABetaRedex(const std::string& m) : std::runtime_error(m) {}
};
struct NotPure : std::runtime_error {
    explicit NotPure(const std::string& m) : std::runtime_error(m) {}
};

// One beta step at a given position of a pure term.
inline Term beta_step_at(const Term& p, const Path& path, FreshSupply& supply) {
    if (!is_pure(p)) throw NotPure("beta_step_at needs a pure term");
    Term red = subterm_at(p, path);
    if (!red.is_app() || !red.fun().is_abs()) throw NotABetaRedex("no (\\x.t)u at path");
    Term contractum = subst_meta(red.fun().body(), red.fun().name(), red.arg(), supply);
    return replace_at(p, path, contractum);
}

inline std::vector<Path> beta_redexes(const Term& p) {
    std::vector<Path> out;
    Path here;
    auto walk = [&](auto&& self, const Term& t) -> void {
        if (t.is_app() && t.fun().is_abs()) out.push_back(here);
        switch (t.kind()) {
            case TermKind::Abs:
                here.push_back(Sel::AbsBody);
                self(self, t.body());
                here.pop_back();
                break;
            case TermKind::App:
                here.push_back(Sel::AppFun);
                self(self, t.fun());
                here.back() = Sel::AppArg;
                self(self, t.arg());
                here.pop_back();
                break;
            default:
                break;
        }
    };
    walk(walk, p);
    return out;
}

// Canonical printing used for alpha-modulo visited sets: binders renumbered
// in traversal order.
inline std::string alpha_canonical(const Term& t) {
    std::string out;
    std::vector<std::pair<Name, std::string>> env;
    size_t next = 0;
    auto walk = [&](auto&& self, const Term& u) -> void {
        switch (u.kind()) {
            case TermKind::Var: {
                for (size_t i = env.size(); i-- > 0;)
                    if (env[i].first == u.name()) {
                        out += env[i].second;
                        out += ';';
                        return;
                    }
                out += '!';
                out += u.name();
                out += ';';
                return;
            }
            case TermKind::Hole:
                out += '<';
                out += u.name();
                out += '>';
                return;
            case TermKind::Abs:
                out += 'L';
                env.emplace_back(u.name(), "#" + std::to_string(next++));
                self(self, u.body());
                env.pop_back();
                return;
            case TermKind::App:
                out += '(';
                self(self, u.fun());
                out += ' ';
                self(self, u.arg());
                out += ')';
                return;
            case TermKind::Sub:
            case TermKind::Dist:
                out += u.is_sub() ? 'S' : 'D';
                self(self, u.content());
                env.emplace_back(u.name(), "#" + std::to_string(next++));
                self(self, u.body());
                env.pop_back();
                return;
        }
    };
    walk(walk, t);
    return out;
}

enum class ReachResult { Reached, NotWithinFuel };

// Bounded breadth-first search for an alpha-match among beta reducts.
inline ReachResult beta_reach(const Term& p, const Term& q, size_t fuel, FreshSupply& supply) {
    if (!is_pure(p) || !is_pure(q)) throw NotPure("beta_reach needs pure terms");
    std::deque<Term> frontier{p};
    std::set<std::string> seen{alpha_canonical(p)};
    std::string goal = alpha_canonical(q);
    size_t budget = fuel;
    while (!frontier.empty()) {
        Term cur = frontier.front();
        frontier.pop_front();
        if (alpha_canonical(cur) == goal) return ReachResult::Reached;
        if (budget == 0) continue;
        for (const Path& r : beta_redexes(cur)) {
            if (budget == 0) break;
            --budget;
            Term next = beta_step_at(cur, r, supply);
            if (seen.insert(alpha_canonical(next)).second) frontier.push_back(next);
        }
    }
    return ReachResult::NotWithinFuel;
}

// Leftmost-outermost normalization with a step budget.
inline std::optional<Term> beta_normalize(Term p, size_t fuel, FreshSupply& supply) {
    for (size_t i = 0; i < fuel; ++i) {
        auto rs = beta_redexes(p);
        if (rs.empty()) return p;
        p = beta_step_at(p, rs.front(), supply);
    }
    return std::nullopt;
}

enum class GenGrammar { PureLambda, U };

struct GenConfig {
    uint64_t seed = 0;
    size_t max_size = 12;
    std::vector<Name> var_pool = {"x", "y", "z", "w"};
    bool closed = false;
    GenGrammar grammar = GenGrammar::PureLambda;
};

namespace detail {

class Generator {
public:
    explicit Generator(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    Term gen() {
        size_t budget = 1 + rng_() % cfg_.max_size;
        return cfg_.grammar == GenGrammar::PureLambda ? gen_pure(budget) : gen_u(budget);
    }

private:
    GenConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<Name> scope_;
    size_t binders_ = 0;

    size_t pick(size_t n) { return rng_() % n; }

    Name fresh_binder() { return "b" + std::to_string(binders_++); }

    Name pick_var() {
        if (!scope_.empty() && (cfg_.closed || pick(2) == 0))
            return scope_[pick(scope_.size())];
        if (cfg_.closed && !scope_.empty()) return scope_[pick(scope_.size())];
        if (cfg_.closed || cfg_.var_pool.empty())
            return scope_.empty() ? Name("x") : scope_[pick(scope_.size())];
        return cfg_.var_pool[pick(cfg_.var_pool.size())];
    }

    Term gen_pure(size_t budget) {
        if (budget <= 1) {
            if (cfg_.closed && scope_.empty()) return gen_abs_pure(1);
            return Term::var(pick_var());
        }
        switch (cfg_.closed && scope_.empty() ? 1 : pick(3)) {
            case 0:
                return Term::var(pick_var());
            case 1:
                return gen_abs_pure(budget);
            default: {
                size_t l = 1 + pick(budget - 1);
                Term f = gen_pure(l);
                Term a = gen_pure(budget - l);
                return Term::app(f, a);
            }
        }
    }

    Term gen_abs_pure(size_t budget) {
        Name b = fresh_binder();
        scope_.push_back(b);
        Term body = gen_pure(budget > 1 ? budget - 1 : 1);
        scope_.pop_back();
        return Term::abs(b, body);
    }

    // Restricted terms; distributor contents are drawn from values so that
    // every generated term behaves uniformly under both weak strategies.
    Term gen_u(size_t budget) {
        if (budget <= 1) {
            if (cfg_.closed && scope_.empty()) return gen_abs_pure(1);
            return Term::var(pick_var());
        }
        switch (cfg_.closed && scope_.empty() ? 1 : pick(5)) {
            case 0:
                return Term::var(pick_var());
            case 1:
                return gen_abs_pure(budget);  // values
            case 2: {
                size_t l = 1 + pick(budget - 1);
                Term f = gen_u(l);
                Term a = gen_u(budget - l);
                return Term::app(f, a);
            }
            case 3: {  // U[x/U]
                size_t l = 1 + pick(budget - 1);
                Term content = gen_u(budget - l);
                Name b = fresh_binder();
                scope_.push_back(b);
                Term body = gen_u(l);
                scope_.pop_back();
                return Term::sub(body, b, content);
            }
            default: {  // U[x//v]
                size_t l = 1 + pick(budget - 1);
                Term content = gen_abs_pure(budget - l);
                Name b = fresh_binder();
                scope_.push_back(b);
                Term body = gen_u(l);
                scope_.pop_back();
                return Term::dist(body, b, content);
            }
        }
    }
};

}  // namespace detail

inline Term gen_term(const GenConfig& cfg) { return detail::Generator(cfg).gen(); }

// Structural shrink candidates staying inside the requested grammar.
inline std::vector<Term> shrink_candidates(const Term& t, GenGrammar grammar) {
    std::vector<Term> subs;
    auto keep = [&](const Term& s) {
        bool ok = grammar == GenGrammar::PureLambda ? is_pure(s) : in_u(s);
        if (ok && term_size(s) < term_size(t)) subs.push_back(s);
    };
    switch (t.kind()) {
        case TermKind::Abs:
            keep(t.body());
            break;
        case TermKind::App:
            keep(t.fun());
            keep(t.arg());
            break;
        case TermKind::Sub:
        case TermKind::Dist:
            keep(t.body());
            keep(t.content());
            break;
        default:
            break;
    }
    return subs;
}

}  // namespace lambdar
