#pragma once

// Subject expansion: given a typing derivation for the target of a step,
// rebuild one for its source.  Every rewrite step records enough witness
// data (rule, position, substitution sites, relocated list length, inner
// permutation trace) to drive the reconstruction without search.

#include "lambdar/strategies.hpp"
#include "lambdar/types.hpp"

namespace lambdar {

struct ExpandError : std::runtime_error {
    explicit ExpandError(const std::string& m) : std::runtime_error(m) {}
};

namespace detail {

struct LocalExpand {
    std::function<Term(const Term&)> on_term;
    std::function<DerivPtr(const DerivPtr&)> on_deriv;
};

// Apply a local surgery at a term position inside a derivation.  MANY nodes
// fan out over their premises; untyped regions (ANS bodies, empty MANY) only
// have their subjects rewritten.
inline DerivPtr transform_at(const DerivPtr& d, const Path& path, size_t i,
                             const LocalExpand& f) {
    auto shield = [&]() {
        Path rest(path.begin() + i, path.end());
        Term sub = subterm_at(d->subject, rest);
        return replace_at(d->subject, rest, f.on_term(sub));
    };
    if (d->is_many()) {
        std::vector<DerivPtr> ps;
        for (const DerivPtr& p : d->premises) ps.push_back(transform_at(p, path, i, f));
        return dv_many(std::move(ps), shield());
    }
    if (i == path.size()) return f.on_deriv(d);
    switch (d->rule) {
        case TRule::ANS:
            return dv_ans(shield());
        case TRule::ABS:
            if (path[i] != Sel::AbsBody) throw InvalidPath("ABS expects a body step");
            return dv_abs(transform_at(d->premises[0], path, i + 1, f), d->subject.name());
        case TRule::APP:
            if (path[i] == Sel::AppFun)
                return dv_app(transform_at(d->premises[0], path, i + 1, f), d->premises[1]);
            if (path[i] == Sel::AppArg)
                return dv_app(d->premises[0], transform_at(d->premises[1], path, i + 1, f));
            throw InvalidPath("APP expects a function or argument step");
        case TRule::CUT:
            if (path[i] == Sel::CutBody)
                return dv_cut(transform_at(d->premises[0], path, i + 1, f), d->subject.name(),
                              d->premises[1], d->subject.kind());
            if (path[i] == Sel::CutContent)
                return dv_cut(d->premises[0], d->subject.name(),
                              transform_at(d->premises[1], path, i + 1, f),
                              d->subject.kind());
            throw InvalidPath("CUT expects a body or content step");
        default:
            throw InvalidPath("cannot descend through this rule");
    }
}

// --- inverse permutation surgeries: move one cut back inside ---------------

inline LocalExpand inv_pi1() {
    return {
        [](const Term& t) {
            return Term::abs(t.body().name(),
                             Term::cut(t.body().body(), t.name(), t.content(), t.kind()));
        },
        [](const DerivPtr& d) -> DerivPtr {
            const DerivPtr& p = d->premises.at(0);
            const Term& t = d->subject;
            Term inner =
                Term::cut(t.body().body(), t.name(), t.content(), t.kind());
            if (p->rule == TRule::ANS) {
                if (!d->premises.at(1)->premises.empty())
                    throw ExpandError("answer premise with a nonempty content");
                return dv_ans(Term::abs(t.body().name(), inner));
            }
            // bind with the premise's own binder: its subject may be an
            // alpha-variant of the stored one
            return dv_abs(dv_cut(p->premises.at(0), t.name(), d->premises.at(1), t.kind()),
                          p->subject.name());
        }};
}

inline LocalExpand inv_pi2() {
    return {
        [](const Term& t) {
            return Term::app(
                Term::cut(t.body().fun(), t.name(), t.content(), t.kind()),
                t.body().arg());
        },
        [](const DerivPtr& d) -> DerivPtr {
            const DerivPtr& app = d->premises.at(0);
            return dv_app(dv_cut(app->premises.at(0), d->subject.name(), d->premises.at(1),
                                 d->subject.kind()),
                          app->premises.at(1));
        }};
}

inline LocalExpand inv_pi3() {
    return {
        [](const Term& t) {
            return Term::app(
                t.body().fun(),
                Term::cut(t.body().arg(), t.name(), t.content(), t.kind()));
        },
        [](const DerivPtr& d) -> DerivPtr {
            const DerivPtr& app = d->premises.at(0);
            const DerivPtr& argmany = app->premises.at(1);
            std::vector<DerivPtr> pool = d->premises.at(1)->premises;
            Term newarg = Term::cut(d->subject.body().arg(), d->subject.name(),
                                    d->subject.content(), d->subject.kind());
            std::vector<DerivPtr> cs;
            for (const DerivPtr& s : argmany->premises) {
                auto drawn = draw_by_types(pool, env_get(s->env, d->subject.name()),
                                           "inverse permutation (argument)");
                cs.push_back(dv_cut(s, d->subject.name(),
                                    dv_many(std::move(drawn), d->subject.content()),
                                    d->subject.kind()));
            }
            if (!pool.empty()) throw ExpandError("unused cut premises in inverse pi3");
            return dv_app(app->premises.at(0), dv_many(std::move(cs), newarg));
        }};
}

inline LocalExpand inv_pi4() {
    return {
        [](const Term& t) {
            const Term inner = t.body();
            return Term::cut(inner.body(), inner.name(),
                             Term::cut(inner.content(), t.name(), t.content(), t.kind()),
                             inner.kind());
        },
        [](const DerivPtr& d) -> DerivPtr {
            const DerivPtr& innercut = d->premises.at(0);
            const DerivPtr& umany = innercut->premises.at(1);
            const Term inner = d->subject.body();
            std::vector<DerivPtr> pool = d->premises.at(1)->premises;
            Term newcontent =
                Term::cut(inner.content(), d->subject.name(), d->subject.content(),
                          d->subject.kind());
            std::vector<DerivPtr> cs;
            for (const DerivPtr& u : umany->premises) {
                auto drawn = draw_by_types(pool, env_get(u->env, d->subject.name()),
                                           "inverse permutation (content)");
                cs.push_back(dv_cut(u, d->subject.name(),
                                    dv_many(std::move(drawn), d->subject.content()),
                                    d->subject.kind()));
            }
            if (!pool.empty()) throw ExpandError("unused cut premises in inverse pi4");
            return dv_cut(innercut->premises.at(0), inner.name(),
                          dv_many(std::move(cs), newcontent), inner.kind());
        }};
}

// Move a trailing cut inside a distributor content body:
// s[x//\y.r][w<c]  =>  s[x//\y.(r[w<c])]
inline LocalExpand inv_pi_dist() {
    return {
        [](const Term& t) {
            const Term dist = t.body();
            const Term lam = dist.content();
            return Term::dist(
                dist.body(), dist.name(),
                Term::abs(lam.name(),
                          Term::cut(lam.body(), t.name(), t.content(), t.kind())));
        },
        [](const DerivPtr& d) -> DerivPtr {
            const DerivPtr& distd = d->premises.at(0);
            const DerivPtr& cmany = d->premises.at(1);
            const Term dist = d->subject.body();
            const Term lam = dist.content();
            Term newlam = Term::abs(
                lam.name(), Term::cut(lam.body(), d->subject.name(), d->subject.content(),
                                      d->subject.kind()));
            std::vector<DerivPtr> pool = cmany->premises;
            std::vector<DerivPtr> ps;
            for (const DerivPtr& p : distd->premises.at(1)->premises) {
                if (p->rule == TRule::ANS) {
                    ps.push_back(dv_ans(newlam));
                    continue;
                }
                const DerivPtr& body = p->premises.at(0);
                auto drawn = draw_by_types(pool, env_get(body->env, d->subject.name()),
                                           "inverse permutation (distributor)");
                ps.push_back(dv_abs(dv_cut(body, d->subject.name(),
                                           dv_many(std::move(drawn), d->subject.content()),
                                           d->subject.kind()),
                                    p->subject.name()));
            }
            if (!pool.empty()) throw ExpandError("unused cut premises entering a distributor");
            return dv_cut(distd->premises.at(0), dist.name(), dv_many(std::move(ps), newlam),
                          TermKind::Dist);
        }};
}

// --- rule inversions at the contractum core --------------------------------

// t[x/u]  =>  (\x.t) u
inline LocalExpand unc_db() {
    return {
        [](const Term& t) {
            return Term::app(Term::abs(t.name(), t.body()), t.content());
        },
        [](const DerivPtr& d) -> DerivPtr {
            return dv_app(dv_abs(d->premises.at(0), d->subject.name()), d->premises.at(1));
        }};
}

inline Term restore_occurrences(Term t, const std::vector<Path>& occs, const Name& x) {
    for (const Path& p : occs) t = replace_at(t, p, Term::var(x));
    return t;
}

// t{x/yz}[y/u][z/s]  =>  t[x/us]
inline LocalExpand unc_app(const RewriteStep& w) {
    return {
        [&w](const Term& t) {
            Term body = restore_occurrences(t.body().body(), w.occurrences, w.binder);
            return Term::sub(body, w.binder,
                             Term::app(t.body().content(), t.content()));
        },
        [&w](const DerivPtr& d) -> DerivPtr {
            const DerivPtr& inner = d->premises.at(0);
            const DerivPtr& smany = d->premises.at(1);
            const DerivPtr& umany = inner->premises.at(1);
            auto [ctx, extracted] =
                anti_subst_all(inner->premises.at(0), w.occurrences, w.binder, w.replaced);
            Term us = Term::app(umany->subject, smany->subject);
            std::vector<DerivPtr> upool = umany->premises, spool = smany->premises;
            std::vector<DerivPtr> apps;
            for (const DerivPtr& psi : extracted->premises) {
                if (psi->rule != TRule::APP || psi->premises.at(0)->rule != TRule::AX)
                    throw ExpandError("substitution site is not an application of axioms");
                auto u = draw_by_types(upool, {psi->premises.at(0)->type},
                                       "application expansion (function)");
                auto s = draw_by_types(spool, psi->premises.at(1)->multi,
                                       "application expansion (argument)");
                apps.push_back(dv_app(u.at(0), dv_many(std::move(s), smany->subject)));
            }
            if (!upool.empty() || !spool.empty())
                throw ExpandError("unused premises in application expansion");
            return dv_cut(ctx, w.binder, dv_many(std::move(apps), us), TermKind::Sub);
        }};
}

// t{x/y}  =>  t[x/y]
inline LocalExpand unc_var(const RewriteStep& w) {
    return {
        [&w](const Term& t) {
            Term content =
                w.occurrences.empty() ? w.replaced : subterm_at(t, w.occurrences.front());
            return Term::sub(restore_occurrences(t, w.occurrences, w.binder), w.binder,
                             content);
        },
        [&w](const DerivPtr& d) -> DerivPtr {
            auto [ctx, extracted] = anti_subst_all(d, w.occurrences, w.binder, w.replaced);
            return dv_cut(ctx, w.binder, extracted, TermKind::Sub);
        }};
}

// t{x/\y.p}  =>  t[x//\y.p]
inline LocalExpand unc_abs(const RewriteStep& w) {
    return {
        [&w](const Term& t) {
            Term content =
                w.occurrences.empty() ? w.replaced : subterm_at(t, w.occurrences.front());
            return Term::dist(restore_occurrences(t, w.occurrences, w.binder), w.binder,
                              content);
        },
        [&w](const DerivPtr& d) -> DerivPtr {
            auto [ctx, extracted] = anti_subst_all(d, w.occurrences, w.binder, w.replaced);
            return dv_cut(ctx, w.binder, extracted, TermKind::Dist);
        }};
}

// t[x//\y.z[z/u]]  =>  t[x/\y.u]
inline LocalExpand unc_dist() {
    return {
        [](const Term& t) {
            const Term lam = t.content();
            return Term::sub(t.body(), t.name(),
                             Term::abs(lam.name(), lam.body().content()));
        },
        [](const DerivPtr& d) -> DerivPtr {
            const Term lam = d->subject.content();
            Term value = Term::abs(lam.name(), lam.body().content());
            std::vector<DerivPtr> ps;
            for (const DerivPtr& p : d->premises.at(1)->premises) {
                if (p->rule == TRule::ANS) {
                    ps.push_back(dv_ans(value));
                    continue;
                }
                const DerivPtr& zcut = p->premises.at(0);
                if (zcut->rule != TRule::CUT || zcut->premises.at(0)->rule != TRule::AX)
                    throw ExpandError("distributor premise lacks the sharing cut");
                const DerivPtr& umany = zcut->premises.at(1);
                if (umany->premises.size() != 1)
                    throw ExpandError("sharing cut content is not linear");
                // the premise's own frame names the binder
                ps.push_back(dv_abs(umany->premises.at(0), p->subject.name()));
            }
            return dv_cut(d->premises.at(0), d->subject.name(), dv_many(std::move(ps), value),
                          TermKind::Sub);
        }};
}

// N<<v>>[x//v]  =>  N<<x>>[x//v]
inline LocalExpand exp_1s(const StratStep& s) {
    return {
        [&s](const Term& t) {
            return Term::dist(replace_at(t.body(), s.need_hole, Term::var(t.name())),
                              t.name(), t.content());
        },
        [&s](const DerivPtr& d) -> DerivPtr {
            auto [ctx, extracted] =
                anti_subst_typing(d->premises.at(0), s.need_hole, d->subject.name());
            std::vector<DerivPtr> all = d->premises.at(1)->premises;
            all.insert(all.end(), extracted->premises.begin(), extracted->premises.end());
            return dv_cut(ctx, d->subject.name(),
                          dv_many(std::move(all), d->subject.content()), TermKind::Dist);
        }};
}

inline Path cut_body_prefix(const Path& base, size_t n) {
    Path p = base;
    p.insert(p.end(), n, Sel::CutBody);
    return p;
}

}  // namespace detail

inline DerivPtr expand_rewrite(const DerivPtr& d, const RewriteStep& w);

namespace detail {

inline DerivPtr expand_pi(const DerivPtr& d, const RewriteStep& w) {
    switch (w.rule) {
        case RuleTag::Pi1: return transform_at(d, w.path, 0, inv_pi1());
        case RuleTag::Pi2: return transform_at(d, w.path, 0, inv_pi2());
        case RuleTag::Pi3: return transform_at(d, w.path, 0, inv_pi3());
        case RuleTag::Pi4: return transform_at(d, w.path, 0, inv_pi4());
        default: throw ExpandError("not a permutation step");
    }
}

inline DerivPtr expand_sub_or_db(const DerivPtr& d0, const RewriteStep& w) {
    DerivPtr d = d0;
    Path core = cut_body_prefix(w.path, w.list_len);
    switch (w.rule) {
        case RuleTag::DB: {
            d = transform_at(d, core, 0, unc_db());
            // pull the relocated list back around the function position
            for (size_t j = w.list_len; j-- > 0;)
                d = transform_at(d, cut_body_prefix(w.path, j), 0, inv_pi2());
            return d;
        }
        case RuleTag::APP: {
            d = transform_at(d, core, 0, unc_app(w));
            for (size_t j = w.list_len; j-- > 0;)
                d = transform_at(d, cut_body_prefix(w.path, j), 0, inv_pi4());
            return d;
        }
        case RuleTag::VAR: {
            d = transform_at(d, core, 0, unc_var(w));
            for (size_t j = w.list_len; j-- > 0;)
                d = transform_at(d, cut_body_prefix(w.path, j), 0, inv_pi4());
            return d;
        }
        case RuleTag::DIST: {
            d = transform_at(d, core, 0, unc_dist());
            for (size_t j = w.list_len; j-- > 0;)
                d = transform_at(d, cut_body_prefix(w.path, j), 0, inv_pi4());
            return d;
        }
        case RuleTag::ABS: {
            d = transform_at(d, core, 0, unc_abs(w));
            for (size_t j = w.list_len; j-- > 0;)
                d = transform_at(d, cut_body_prefix(w.path, j), 0, inv_pi_dist());
            // undo the permutations that shaped the distributor body
            Path body = w.path;
            body.push_back(Sel::CutContent);
            body.push_back(Sel::AbsBody);
            for (size_t j = w.inner.size(); j-- > 0;) {
                RewriteStep pi = w.inner[j];
                Path full = body;
                full.insert(full.end(), pi.path.begin(), pi.path.end());
                pi.path = full;
                d = expand_pi(d, pi);
            }
            return d;
        }
        default:
            throw ExpandError("not a replication step");
    }
}

}  // namespace detail

// Expand one fired rewrite step: from a derivation of the result, build a
// derivation of the source with the same environment and type.
inline DerivPtr expand_rewrite(const DerivPtr& d, const RewriteStep& w) {
    if (is_pi_rule(w.rule)) return detail::expand_pi(d, w);
    return detail::expand_sub_or_db(d, w);
}

// Expand one strategy step.
inline DerivPtr expand_strat(const DerivPtr& d0, const StratStep& s) {
    switch (s.kind) {
        case StepKind::NDB:
        case StepKind::NSUB:
        case StepKind::FL_DB:
        case StepKind::ST_VAR:
        case StepKind::ST_APP:
        case StepKind::ST_DIST:
        case StepKind::ST_ABS:
            return expand_rewrite(d0, s.rw);
        case StepKind::FL_LS:
            return detail::transform_at(d0, s.path, 0, detail::exp_1s(s));
        case StepKind::FL_SPL: {
            DerivPtr d = d0;
            // the sharing list produced by the split sinks back into the
            // distributor content
            for (size_t j = s.l_len + s.ll_len; j-- > s.l_len;)
                d = detail::transform_at(d, detail::cut_body_prefix(s.path, j), 0,
                                         detail::inv_pi_dist());
            // rewind the splitting run inside the content
            Path content = detail::cut_body_prefix(s.path, s.l_len);
            content.push_back(Sel::CutContent);
            for (size_t j = s.st_trace.size(); j-- > 0;) {
                StratStep st = s.st_trace[j];
                RewriteStep w = st.rw;
                Path full = content;
                full.insert(full.end(), w.path.begin(), w.path.end());
                w.path = full;
                d = expand_rewrite(d, w);
            }
            // collapse the sharing cut and revert to a substitution
            d = detail::transform_at(d, detail::cut_body_prefix(s.path, s.l_len), 0,
                                     detail::unc_dist());
            // the distance list sinks back into the substitution content
            for (size_t j = s.l_len; j-- > 0;)
                d = detail::transform_at(d, detail::cut_body_prefix(s.path, j), 0,
                                         detail::inv_pi4());
            return d;
        }
    }
    throw ExpandError("unsupported step kind");
}

// ---------------------------------------------------------------------------
// Type inference by normalize-then-expand.

struct InferResult {
    DerivPtr deriv;
    Trace trace;  // the forward evaluation used to reach the normal form
};

inline std::optional<InferResult> infer(const Term& t, size_t fuel, FreshSupply& supply) {
    Trace tr = flneed_normalize(t, fuel, supply);
    if (tr.status != TraceStatus::NormalForm) return std::nullopt;
    Term nf = tr.final();
    // A needed distributor holding a non-value blocks the strategy outside
    // the normal-form grammar; no derivation is claimed for those.
    if (!in_ne(nf)) return std::nullopt;
    DerivPtr d = is_answer(nf) ? type_normal_form(nf, IType::answer())
                               : type_normal_form(nf, IType::base_type("o"));
    for (size_t i = tr.steps.size(); i-- > 0;) d = expand_strat(d, tr.steps[i]);
    if (!alpha_eq(d->subject, t)) throw ExpandError("expansion did not restore the source");
    return InferResult{d, std::move(tr)};
}

}  // namespace lambdar
