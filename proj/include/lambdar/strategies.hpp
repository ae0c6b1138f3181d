#pragma once

// The two weak strategies: call-by-name and fully lazy call-by-need, with
// the skeleton / maximal-free-expression splitting machinery shared by
// both the big-step and the small-step presentations.

#include "lambdar/grammar.hpp"
#include "lambdar/rewrite.hpp"

namespace lambdar {

struct NotInU : std::runtime_error {
    explicit NotInU(const std::string& m) : std::runtime_error(m) {}
};
struct NotInT : std::runtime_error {
    explicit NotInT(const std::string& m) : std::runtime_error(m) {}
};

enum class StepKind { NDB, NSUB, FL_DB, FL_SPL, FL_LS, ST_VAR, ST_APP, ST_DIST, ST_ABS };

inline const char* step_name(StepKind k) {
    switch (k) {
        case StepKind::NDB: return "ndB";
        case StepKind::NSUB: return "nsub";
        case StepKind::FL_DB: return "dB";
        case StepKind::FL_SPL: return "spl";
        case StepKind::FL_LS: return "1s";
        case StepKind::ST_VAR: return "st-var";
        case StepKind::ST_APP: return "st-app";
        case StepKind::ST_DIST: return "st-dist";
        case StepKind::ST_ABS: return "st-abs";
    }
    return "?";
}

enum class TraceStatus { NormalForm, FuelExhausted };

// One strategy step, with enough witness data to run subject expansion.
struct StratStep {
    StepKind kind{};
    Path path;   // redex position
    Term after;  // whole term after the step

    RewriteStep rw;  // underlying rewrite fire (dB and sub-style steps)

    // splitting witness (FL_SPL)
    std::vector<StratStep> st_trace;  // run on split_input
    Term split_input;                 // \y.z[z/p]
    Term split_output;                // \y.LL<p'>
    size_t l_len = 0, ll_len = 0;

    // linear substitution witness (FL_LS)
    Path need_hole;  // the needed occurrence inside the cut body
    Term inserted;   // the value placed there
};

struct Trace {
    Term initial;
    std::vector<StratStep> steps;
    TraceStatus status = TraceStatus::NormalForm;
    Term final() const { return steps.empty() ? initial : steps.back().after; }
    size_t db_count() const {
        size_t n = 0;
        for (const StratStep& s : steps)
            n += (s.kind == StepKind::NDB || s.kind == StepKind::FL_DB) ? 1 : 0;
        return n;
    }
};

// ---------------------------------------------------------------------------
// Call-by-name.
//
// dB redexes are closed under application-left and under cut bodies; sub
// redexes under application-left, the root, and distributor content bodies.

inline void name_ndb_positions(const Term& t, Path& here, std::vector<Redex>& out) {
    auto rule = match_r_at(t);
    if (rule && *rule == RuleTag::DB) out.push_back({here, RuleTag::DB});
    if (t.is_app()) {
        here.push_back(Sel::AppFun);
        name_ndb_positions(t.fun(), here, out);
        here.pop_back();
    } else if (t.is_cut()) {
        here.push_back(Sel::CutBody);
        name_ndb_positions(t.body(), here, out);
        here.pop_back();
    }
}

inline void name_nsub_positions(const Term& t, Path& here, std::vector<Redex>& out) {
    auto rule = match_r_at(t);
    if (rule && is_sub_rule(*rule)) out.push_back({here, *rule});
    if (t.is_app()) {
        here.push_back(Sel::AppFun);
        name_nsub_positions(t.fun(), here, out);
        here.pop_back();
    } else if (t.is_dist()) {
        here.push_back(Sel::CutContent);
        here.push_back(Sel::AbsBody);
        name_nsub_positions(t.content().body(), here, out);
        here.pop_back();
        here.pop_back();
    }
}

inline std::vector<std::pair<StepKind, Redex>> name_redexes(const Term& t) {
    if (!in_u(t)) throw NotInU("name strategy is defined on restricted terms");
    std::vector<std::pair<StepKind, Redex>> out;
    std::vector<Redex> dbs, subs;
    Path here;
    name_ndb_positions(t, here, dbs);
    name_nsub_positions(t, here, subs);
    for (const Redex& r : dbs) out.emplace_back(StepKind::NDB, r);
    for (const Redex& r : subs) out.emplace_back(StepKind::NSUB, r);
    return out;
}

enum class NamePolicy { PreferDB, PreferSub, Leftmost };

inline bool path_before(const Path& a, const Path& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline std::optional<std::pair<StepKind, Redex>> pick_name_redex(
    const std::vector<std::pair<StepKind, Redex>>& rs, NamePolicy policy) {
    if (rs.empty()) return std::nullopt;
    switch (policy) {
        case NamePolicy::PreferDB:
            for (auto& r : rs)
                if (r.first == StepKind::NDB) return r;
            return rs.front();
        case NamePolicy::PreferSub:
            for (auto& r : rs)
                if (r.first == StepKind::NSUB) return r;
            return rs.front();
        case NamePolicy::Leftmost: {
            auto best = rs.front();
            for (auto& r : rs)
                if (path_before(r.second.path, best.second.path)) best = r;
            return best;
        }
    }
    return std::nullopt;
}

inline Trace name_normalize(const Term& t, size_t fuel, NamePolicy policy,
                            FreshSupply& supply) {
    supply.reserve(all_names(t));
    Trace tr;
    tr.initial = t;
    Term cur = t;
    for (size_t i = 0; i < fuel; ++i) {
        auto rs = name_redexes(cur);
        auto pickd = pick_name_redex(rs, policy);
        if (!pickd) {
            tr.status = TraceStatus::NormalForm;
            return tr;
        }
        StratStep s;
        s.kind = pickd->first;
        s.path = pickd->second.path;
        s.rw = fire(cur, pickd->second, supply);
        s.after = s.rw.after;
        cur = s.after;
        tr.steps.push_back(std::move(s));
    }
    tr.status = TraceStatus::FuelExhausted;
    return tr;
}

// Weak-head reduction on pure terms.
inline std::optional<Term> whr_step(const Term& p) {
    if (!is_pure(p)) throw NotPure("weak-head reduction needs a pure term");
    if (!p.is_app()) return std::nullopt;
    if (p.fun().is_abs()) {
        FreshSupply supply;
        supply.reserve(free_vars(p));
        return subst_meta(p.fun().body(), p.fun().name(), p.arg(), supply);
    }
    if (auto f = whr_step(p.fun())) return Term::app(*f, p.arg());
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Skeletons and maximal free expressions.

// Outermost subterms of p avoiding theta (extended with crossed binders),
// in left-to-right preorder.
inline void mfe_rec(const Term& p, NameSet& theta, std::vector<Term>& out) {
    NameSet fv = free_vars(p);
    bool touched = false;
    for (const Name& n : fv)
        if (theta.count(n)) {
            touched = true;
            break;
        }
    if (!touched) {
        out.push_back(p);
        return;
    }
    switch (p.kind()) {
        case TermKind::Var:
            return;
        case TermKind::Abs: {
            bool added = theta.insert(p.name()).second;
            mfe_rec(p.body(), theta, out);
            if (added) theta.erase(p.name());
            return;
        }
        case TermKind::App:
            mfe_rec(p.fun(), theta, out);
            mfe_rec(p.arg(), theta, out);
            return;
        default:
            throw NotPure("maximal free expressions need a pure term");
    }
}

inline std::vector<Term> mfe_list(const Term& p, const NameSet& theta) {
    if (!is_pure(p)) throw NotPure("maximal free expressions need a pure term");
    NameSet th = theta;
    std::vector<Term> out;
    mfe_rec(p, th, out);
    return out;
}

// The theta-skeleton as an n-ary context with numbered holes.
inline Term skeleton_rec(const Term& p, NameSet& theta, int& next) {
    NameSet fv = free_vars(p);
    bool touched = false;
    for (const Name& n : fv)
        if (theta.count(n)) {
            touched = true;
            break;
        }
    if (!touched) return Term::hole(next++);
    switch (p.kind()) {
        case TermKind::Var:
            return p;
        case TermKind::Abs: {
            bool added = theta.insert(p.name()).second;
            Term b = skeleton_rec(p.body(), theta, next);
            if (added) theta.erase(p.name());
            return Term::abs(p.name(), b);
        }
        case TermKind::App: {
            Term f = skeleton_rec(p.fun(), theta, next);
            Term a = skeleton_rec(p.arg(), theta, next);
            return Term::app(f, a);
        }
        default:
            throw NotPure("skeletons need a pure term");
    }
}

inline Term skeleton(const Term& p, const NameSet& theta) {
    if (!is_pure(p)) throw NotPure("skeletons need a pure term");
    NameSet th = theta;
    int next = 0;
    return skeleton_rec(p, th, next);
}

// Replace numbered holes by the fillers, in order.
inline Term plug_skeleton(const Term& ctx, const std::vector<Term>& fillers) {
    switch (ctx.kind()) {
        case TermKind::Hole:
            return fillers.at(static_cast<size_t>(ctx.hole_index()));
        case TermKind::Var:
            return ctx;
        case TermKind::Abs:
            return Term::abs(ctx.name(), plug_skeleton(ctx.body(), fillers));
        case TermKind::App:
            return Term::app(plug_skeleton(ctx.fun(), fillers),
                             plug_skeleton(ctx.arg(), fillers));
        case TermKind::Sub:
        case TermKind::Dist:
            return Term::cut(plug_skeleton(ctx.body(), fillers), ctx.name(),
                             plug_skeleton(ctx.content(), fillers), ctx.kind());
    }
    return ctx;
}

// Big-step splitting: share every maximal free expression in its own cut.
// Function cuts end up closer to the core than argument cuts.
inline std::pair<Term, std::vector<Cut>> split_bigstep_rec(const Term& p, NameSet& theta,
                                                           FreshSupply& supply,
                                                           const NameSet& avoid) {
    NameSet fv = free_vars(p);
    bool touched = false;
    for (const Name& n : fv)
        if (theta.count(n)) {
            touched = true;
            break;
        }
    if (!touched) {
        Name x = supply.fresh("x", avoid);
        return {Term::var(x), {{x, p, TermKind::Sub}}};
    }
    switch (p.kind()) {
        case TermKind::Var:
            return {p, {}};
        case TermKind::Abs: {
            bool added = theta.insert(p.name()).second;
            auto [core, cuts] = split_bigstep_rec(p.body(), theta, supply, avoid);
            if (added) theta.erase(p.name());
            return {Term::abs(p.name(), core), std::move(cuts)};
        }
        case TermKind::App: {
            auto [f, fcuts] = split_bigstep_rec(p.fun(), theta, supply, avoid);
            auto [a, acuts] = split_bigstep_rec(p.arg(), theta, supply, avoid);
            fcuts.insert(fcuts.end(), acuts.begin(), acuts.end());
            return {Term::app(f, a), std::move(fcuts)};
        }
        default:
            throw NotPure("big-step splitting needs a pure term");
    }
}

inline Term split_bigstep(const Term& p, const NameSet& theta, FreshSupply& supply) {
    if (!is_pure(p)) throw NotPure("big-step splitting needs a pure term");
    supply.reserve(all_names(p));
    NameSet th = theta;
    NameSet avoid = free_vars(p);
    avoid.insert(theta.begin(), theta.end());
    auto [core, cuts] = split_bigstep_rec(p, th, supply, avoid);
    return rebuild_list(core, cuts);
}

// ---------------------------------------------------------------------------
// Small-step splitting on linear cut values.

inline std::optional<StratStep> st_step_unchecked(const Term& t, FreshSupply& supply) {
    const Name& y = t.name();
    auto [core, cuts] = peel_list(t.body());
    // scan the cuts from the outermost inward; cuts not mentioning the
    // binder belong to the finished part of the list
    for (size_t i = cuts.size(); i-- > 0;) {
        const Cut& c = cuts[i];
        if (!is_free_in(y, c.content)) continue;
        Path local{Sel::AbsBody};
        for (size_t j = cuts.size(); j-- > i + 1;) local.push_back(Sel::CutBody);
        Term node = subterm_at(t, local);
        StratStep s;
        if (c.kind == TermKind::Sub) {
            switch (c.content.kind()) {
                case TermKind::Var: s.kind = StepKind::ST_VAR; break;
                case TermKind::App: s.kind = StepKind::ST_APP; break;
                case TermKind::Abs: s.kind = StepKind::ST_DIST; break;
                default: throw NotInT("substitution content is not pure");
            }
            Redex r{local, match_r_at(node).value()};
            s.path = local;
            s.rw = fire(t, r, supply);
            s.after = s.rw.after;
            return s;
        }
        // distributor: extrude the finished list or keep splitting inside
        if (abs_applicable(node)) {
            s.kind = StepKind::ST_ABS;
            s.path = local;
            s.rw = fire(t, {local, RuleTag::ABS}, supply);
            s.after = s.rw.after;
            return s;
        }
        auto inner = st_step_unchecked(c.content, supply);
        if (!inner) return std::nullopt;  // cannot happen on linear cut values
        Path full = local;
        full.push_back(Sel::CutContent);
        full.insert(full.end(), inner->path.begin(), inner->path.end());
        StratStep out = *inner;
        out.path = full;
        out.rw.path = full;
        out.after = replace_at(t, local, Term::cut(node.body(), node.name(), inner->after,
                                                   TermKind::Dist));
        out.rw.after = out.after;
        return out;
    }
    return std::nullopt;
}

// The unique splitting step, if any.
inline std::optional<StratStep> st_step(const Term& t, FreshSupply& supply) {
    if (!is_linear_cut_value(t)) throw NotInT("small-step splitting needs a linear cut value");
    supply.reserve(all_names(t));
    return st_step_unchecked(t, supply);
}

inline Term st_normalize(const Term& t, FreshSupply& supply,
                         std::vector<StratStep>* steps = nullptr, size_t fuel = 100000) {
    if (!is_linear_cut_value(t)) throw NotInT("small-step splitting needs a linear cut value");
    supply.reserve(all_names(t));
    Term cur = t;
    for (size_t i = 0; i < fuel; ++i) {
        auto s = st_step_unchecked(cur, supply);
        if (!s) return cur;
        cur = s->after;
        if (steps) steps->push_back(std::move(*s));
    }
    throw InternalNonTermination("splitting exceeded fuel");
}

// ---------------------------------------------------------------------------
// Fully lazy call-by-need.

// The unique needed occurrence, reached by descending to the head of
// applications, into cut bodies, and into the content of a cut whose
// binder is needed.  Need dies at answers and at distributors.
inline std::optional<std::pair<Name, Path>> locate_need(const Term& t) {
    switch (t.kind()) {
        case TermKind::Var:
            return std::make_pair(t.name(), Path{});
        case TermKind::App: {
            auto r = locate_need(t.fun());
            if (!r) return std::nullopt;
            r->second.insert(r->second.begin(), Sel::AppFun);
            return r;
        }
        case TermKind::Sub:
        case TermKind::Dist: {
            auto r = locate_need(t.body());
            if (!r) return std::nullopt;
            if (r->first != t.name()) {
                r->second.insert(r->second.begin(), Sel::CutBody);
                return r;
            }
            if (t.is_dist()) return std::nullopt;  // distributors never forward need
            auto rc = locate_need(t.content());
            if (!rc) return std::nullopt;
            rc->second.insert(rc->second.begin(), Sel::CutContent);
            return rc;
        }
        default:
            return std::nullopt;
    }
}

namespace detail {

// Plug at `path`, renaming binders along the way that would capture free
// variables of the filler.
inline Term plug_renaming(const Term& t, const Path& path, const Term& filler,
                          FreshSupply& supply, size_t i = 0) {
    if (i == path.size()) return filler;
    bool is_binder = (path[i] == Sel::AbsBody && t.is_abs()) ||
                     (path[i] == Sel::CutBody && t.is_cut());
    Term cur = t;
    if (is_binder && is_free_in(cur.name(), filler)) {
        NameSet avoid = free_vars(filler);
        NameSet bound;
        collect_free(cur, bound, avoid);
        Name b2 = supply.fresh(cur.name(), avoid);
        FreshSupply rename_supply;
        Term body2 = subst_meta(cur.body(), cur.name(), Term::var(b2), rename_supply);
        cur = cur.is_abs() ? Term::abs(b2, body2)
                           : Term::cut(body2, b2, cur.content(), cur.kind());
    }
    switch (path[i]) {
        case Sel::AbsBody:
            return Term::abs(cur.name(), plug_renaming(cur.body(), path, filler, supply, i + 1));
        case Sel::AppFun:
            return Term::app(plug_renaming(cur.fun(), path, filler, supply, i + 1), cur.arg());
        case Sel::AppArg:
            return Term::app(cur.fun(), plug_renaming(cur.arg(), path, filler, supply, i + 1));
        case Sel::CutBody:
            return Term::cut(plug_renaming(cur.body(), path, filler, supply, i + 1), cur.name(),
                             cur.content(), cur.kind());
        case Sel::CutContent:
            return Term::cut(cur.body(), cur.name(),
                             plug_renaming(cur.content(), path, filler, supply, i + 1),
                             cur.kind());
    }
    throw InvalidPath("unreachable");
}

inline std::optional<StratStep> flneed_step_rec(const Term& t, FreshSupply& supply) {
    switch (t.kind()) {
        case TermKind::App: {
            if (peel_list(t.fun()).first.is_abs()) {
                StratStep s;
                s.kind = StepKind::FL_DB;
                s.path = {};
                s.rw = fire(t, {{}, RuleTag::DB}, supply);
                s.after = s.rw.after;
                return s;
            }
            auto r = flneed_step_rec(t.fun(), supply);
            if (!r) return std::nullopt;
            r->path.insert(r->path.begin(), Sel::AppFun);
            r->rw.path = r->path;
            r->after = Term::app(r->after, t.arg());
            r->rw.after = r->after;
            return r;
        }
        case TermKind::Sub:
        case TermKind::Dist: {
            if (auto r = flneed_step_rec(t.body(), supply)) {
                r->path.insert(r->path.begin(), Sel::CutBody);
                r->rw.path = r->path;
                r->after = Term::cut(r->after, t.name(), t.content(), t.kind());
                r->rw.after = r->after;
                return r;
            }
            auto need = locate_need(t.body());
            if (!need || need->first != t.name()) return std::nullopt;
            if (t.is_sub()) {
                if (auto r = flneed_step_rec(t.content(), supply)) {
                    r->path.insert(r->path.begin(), Sel::CutContent);
                    r->rw.path = r->path;
                    r->after = Term::sub(t.body(), t.name(), r->after);
                    r->rw.after = r->after;
                    return r;
                }
                auto [value, lcuts] = peel_list(t.content());
                if (!value.is_abs()) return std::nullopt;  // neutral content
                // splitting: compute the skeleton of the value on the side
                StratStep s;
                s.kind = StepKind::FL_SPL;
                s.path = {};
                NameSet avoid = free_vars(t);
                avoid.insert(t.name());
                Name z = supply.fresh("z", avoid);
                s.split_input =
                    Term::abs(value.name(), Term::sub(Term::var(z), z, value.body()));
                Term split = st_normalize(s.split_input, supply, &s.st_trace);
                s.split_output = split;
                auto [skel_core, llcuts] = peel_list(split.body());
                // relocate the distance list without capturing the body
                NameSet protect = free_vars(t.body());
                protect.erase(t.name());
                Term inner_tmp = rebuild_list(skel_core, llcuts);
                rename_list_binders(inner_tmp, lcuts, protect, supply);
                auto [skel_core2, llcuts2] = peel_list(inner_tmp);
                Term dist_node =
                    Term::dist(t.body(), t.name(), Term::abs(value.name(), skel_core2));
                s.l_len = lcuts.size();
                s.ll_len = llcuts2.size();
                s.after = rebuild_list(rebuild_list(dist_node, llcuts2), lcuts);
                return s;
            }
            // distributor with a needed binder: linear substitution of a value
            if (!is_value(t.content())) return std::nullopt;
            StratStep s;
            s.kind = StepKind::FL_LS;
            s.path = {};
            s.need_hole = need->second;
            s.inserted = t.content();
            Term body2 = plug_renaming(t.body(), need->second, t.content(), supply);
            s.after = Term::dist(body2, t.name(), t.content());
            return s;
        }
        default:
            return std::nullopt;
    }
}

}  // namespace detail

// The unique fully lazy call-by-need step, if any.
inline std::optional<StratStep> flneed_step(const Term& t, FreshSupply& supply) {
    if (!in_u(t)) throw NotInU("call-by-need is defined on restricted terms");
    supply.reserve(all_names(t));
    return detail::flneed_step_rec(t, supply);
}

inline Trace flneed_normalize(const Term& t, size_t fuel, FreshSupply& supply) {
    if (!in_u(t)) throw NotInU("call-by-need is defined on restricted terms");
    supply.reserve(all_names(t));
    Trace tr;
    tr.initial = t;
    Term cur = t;
    for (size_t i = 0; i < fuel; ++i) {
        auto s = detail::flneed_step_rec(cur, supply);
        if (!s) {
            tr.status = TraceStatus::NormalForm;
            return tr;
        }
        cur = s->after;
        tr.steps.push_back(std::move(*s));
    }
    tr.status = TraceStatus::FuelExhausted;
    return tr;
}

}  // namespace lambdar
