// Acceptance suite: one check per shipping criterion, each printed as a
// single pass/fail line.  Exits nonzero when any criterion fails.

#include <iostream>
#include <random>

#include "lambdar/expand.hpp"
#include "lambdar/json_io.hpp"
#include "lambdar/oracle.hpp"

using namespace lambdar;

namespace {

int g_failures = 0;

void report(int n, bool ok, const std::string& what) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << n << "  " << what << "\n";
    if (!ok) ++g_failures;
}

std::string expand_ident(const char* fmt) {
    std::string out;
    for (const char* p = fmt; *p; ++p)
        out += (*p == 'I') ? std::string("(\\i.i)") : std::string(1, *p);
    return out;
}

Term U(const char* fmt) { return parse(expand_ident(fmt)); }

// Replay a displayed reduction step by step: each expected term must be
// reachable by firing an enumerated redex with the stated tag.
bool replay(Term cur, const std::vector<std::pair<RuleTag, const char*>>& steps,
            std::string& err) {
    FreshSupply supply;
    supply.reserve(all_names(cur));
    for (auto& [tag, expect] : steps) {
        Term want = U(expect);
        std::vector<Redex> rs = pi_redexes(cur);
        auto rr = r_redexes(cur, false);
        rs.insert(rs.end(), rr.begin(), rr.end());
        bool moved = false;
        for (const Redex& r : rs) {
            if (r.rule != tag) continue;
            FreshSupply probe = supply;
            Term next = fire(cur, r, probe).after;
            if (alpha_eq(next, want)) {
                cur = next;
                supply = probe;
                moved = true;
                break;
            }
        }
        if (!moved) {
            err = std::string("stuck: no ") + rule_name(tag) + " step from " + print(cur) +
                  " to " + expect;
            return false;
        }
    }
    return true;
}

Term gen_u_term(std::mt19937_64& rng, size_t max_size = 10) {
    GenConfig cfg;
    cfg.seed = rng();
    cfg.grammar = GenGrammar::U;
    cfg.max_size = max_size;
    return gen_term(cfg);
}

// --- criterion 1: golden traces --------------------------------------------

bool golden_rewrites(std::string& err) {
    // permutations (inner cuts percolate out)
    if (!replay(parse("x[x/w[z1//\\u.u](\\y.y[z2/z3])]"),
                {{RuleTag::Pi1, "x[x/w[z1//\\u.u]((\\y.y)[z2/z3])]"},
                 {RuleTag::Pi3, "x[x/(w[z1//\\u.u](\\y.y))[z2/z3]]"},
                 {RuleTag::Pi4, "x[x/w[z1//\\u.u](\\y.y)][z2/z3]"},
                 {RuleTag::Pi2, "x[x/(w(\\y.y))[z1//\\u.u]][z2/z3]"},
                 {RuleTag::Pi4, "x[x/w(\\y.y)][z1//\\u.u][z2/z3]"}},
                err))
        return false;
    // application and variable nodes
    if (!replay(parse("(\\x.x x)(y z)"),
                {{RuleTag::DB, "(x x)[x/y z]"},
                 {RuleTag::APP, "((x1 x2)(x1 x2))[x1/y][x2/z]"},
                 {RuleTag::VAR, "((y x2)(y x2))[x2/z]"},
                 {RuleTag::VAR, "(y z)(y z)"}},
                err))
        return false;
    // abstraction nodes
    if (!replay(parse("(\\x.x x)(\\y.(w w) y)"),
                {{RuleTag::DB, "(x x)[x/\\y.(w w) y]"},
                 {RuleTag::DIST, "(x x)[x//\\y.z[z/(w w) y]]"},
                 {RuleTag::APP, "(x x)[x//\\y.(z1 z2)[z1/w w][z2/y]]"},
                 {RuleTag::VAR, "(x x)[x//\\y.(z1 y)[z1/w w]]"},
                 {RuleTag::APP, "(x x)[x//\\y.((z3 z2) y)[z3/w][z2/w]]"},
                 {RuleTag::ABS, "((\\y.(z3 z2) y)(\\y.(z3 z2) y))[z3/w][z2/w]"},
                 {RuleTag::VAR, "((\\y.(w z2) y)(\\y.(w z2) y))[z2/w]"},
                 {RuleTag::VAR, "(\\y.(w w) y)(\\y.(w w) y)"}},
                err))
        return false;
    // distance
    return replay(parse("(\\x.x)[z4/z5](w[z1//\\u.u](\\y.y[z2/z3]))"),
                  {{RuleTag::DB, "x[x/w[z1//\\u.u](\\y.y[z2/z3])][z4/z5]"},
                   {RuleTag::APP, "(x1 x2)[x1/w[z1//\\u.u]][x2/\\y.y[z2/z3]][z4/z5]"},
                   {RuleTag::VAR, "(w x2)[z1//\\u.u][x2/\\y.y[z2/z3]][z4/z5]"},
                   {RuleTag::DIST, "(w x2)[z1//\\u.u][x2//\\y.x[x/y[z2/z3]]][z4/z5]"},
                   {RuleTag::VAR, "(w x2)[z1//\\u.u][x2//\\y.y[z2/z3]][z4/z5]"},
                   {RuleTag::ABS, "(w(\\y.y))[z1//\\u.u][z2/z3][z4/z5]"}},
                  err);
}

bool golden_name(std::string& err) {
    Term t0 = U("(\\x1.I(x1 I))(\\y.(II) y)");
    std::vector<std::pair<StepKind, const char*>> expected = {
        {StepKind::NDB, "(I(x1 I))[x1/\\y.(II) y]"},
        {StepKind::NSUB, "(I(x1 I))[x1//\\y.z[z/(II) y]]"},
        {StepKind::NSUB, "(I(x1 I))[x1//\\y.(z1 z2)[z1/II][z2/y]]"},
        {StepKind::NSUB, "(I(x1 I))[x1//\\y.(z1 y)[z1/II]]"},
        {StepKind::NSUB, "(I((\\y.z1 y) I))[z1/II]"},
        {StepKind::NDB, "x2[x2/(\\y.z1 y) I][z1/II]"},
    };
    Term cur = t0;
    FreshSupply supply;
    supply.reserve(all_names(cur));
    for (auto& [kind, expect] : expected) {
        Term want = U(expect);
        bool moved = false;
        for (auto& [k, r] : name_redexes(cur)) {
            if (k != kind) continue;
            FreshSupply probe = supply;
            Term next = fire(cur, r, probe).after;
            if (alpha_eq(next, want)) {
                cur = next;
                supply = probe;
                moved = true;
                break;
            }
        }
        if (!moved) {
            err = "name run stuck before " + expand_ident(expect);
            return false;
        }
    }
    // the unique normal form is forced by the head-reduction projection
    Trace tr = name_normalize(cur, 300, NamePolicy::PreferDB, supply);
    if (tr.status != TraceStatus::NormalForm || !alpha_eq(tr.final(), U("I"))) {
        err = "name run did not finish at the identity";
        return false;
    }
    FreshSupply s4;
    auto nf = beta_normalize(unfold(t0), 2000, s4);
    if (!nf || !alpha_eq(*nf, U("I"))) {
        err = "projection sanity check failed";
        return false;
    }
    return true;
}

bool golden_splitting(std::string& err) {
    FreshSupply s1;
    if (!alpha_eq(split_bigstep(parse("(y w) z"), {"y", "z"}, s1), parse("((y x) z)[x/w]"))) {
        err = "big-step split of (y w) z";
        return false;
    }
    FreshSupply s2;
    Term st_in = parse("\\y.x[x/\\z.(y w) z]");
    std::vector<std::pair<StepKind, const char*>> expected = {
        {StepKind::ST_DIST, "\\y.x[x//\\z.q[q/(y w) z]]"},
        {StepKind::ST_APP, "\\y.x[x//\\z.(w1 w2)[w1/y w][w2/z]]"},
        {StepKind::ST_VAR, "\\y.x[x//\\z.(w1 z)[w1/y w]]"},
        {StepKind::ST_ABS, "\\y.(\\z.w1 z)[w1/y w]"},
        {StepKind::ST_APP, "\\y.(\\z.(x1 x2) z)[x1/y][x2/w]"},
        {StepKind::ST_VAR, "\\y.(\\z.(y x2) z)[x2/w]"},
    };
    Term cur = st_in;
    for (auto& [kind, expect] : expected) {
        auto step = st_step(cur, s2);
        if (!step || step->kind != kind || !alpha_eq(step->after, parse(expect))) {
            err = "small-step split diverged before " + std::string(expect);
            return false;
        }
        cur = step->after;
    }
    if (st_step(cur, s2)) {
        err = "small-step split did not stop";
        return false;
    }
    return true;
}

bool golden_flneed(std::string& err) {
    Term t0 = U("(\\x.I(I x))(\\y.y I)");
    std::vector<std::pair<StepKind, const char*>> expected = {
        {StepKind::FL_DB, "(I(I x))[x/\\y.y I]"},
        {StepKind::FL_DB, "x1[x1/I x][x/\\y.y I]"},
        {StepKind::FL_DB, "x1[x1/x2[x2/x]][x/\\y.y I]"},
        {StepKind::FL_SPL, "x1[x1/x2[x2/x]][x//\\y.y z1][z1/I]"},
        {StepKind::FL_LS, "x1[x1/x2[x2/\\y.y z1]][x//\\y.y z1][z1/I]"},
        {StepKind::FL_SPL, "x1[x1/x2[x2//\\y.y z2][z2/z1]][x//\\y.y z1][z1/I]"},
        {StepKind::FL_LS, "x1[x1/(\\y.y z2)[x2//\\y.y z2][z2/z1]][x//\\y.y z1][z1/I]"},
        {StepKind::FL_SPL, "x1[x1//\\y.y z3][z3/z2][x2//\\y.y z2][z2/z1][x//\\y.y z1][z1/I]"},
        {StepKind::FL_LS,
         "(\\y.y z3)[x1//\\y.y z3][z3/z2][x2//\\y.y z2][z2/z1][x//\\y.y z1][z1/I]"},
    };
    FreshSupply supply;
    Term cur = t0;
    for (auto& [kind, expect] : expected) {
        auto step = flneed_step(cur, supply);
        if (!step || step->kind != kind || !alpha_eq(step->after, U(expect))) {
            err = "need run diverged before " + expand_ident(expect);
            return false;
        }
        cur = step->after;
    }
    if (flneed_step(cur, supply) || !in_ne(cur)) {
        err = "need run did not stop at a normal form";
        return false;
    }
    return true;
}

bool golden_cl(std::string& err) {
    std::vector<const char*> seq = {
        "(y y)[y/(\\z.x) w]",
        "((y1 y2)(y1 y2))[y1/\\z.x][y2/w]",
        "((y1 w)(y1 w))[y1/\\z.x]",
        "((y1 w)(y1 w))[y1//\\z.x1[x1/x]]",
        "(((\\z.x1) w)((\\z.x1) w))[x1/x]",
        "((\\z.x) w)((\\z.x) w)",
    };
    std::vector<const char*> cls = {"[a(1, 4)]", "[a(1, 1), a(1, 2)]", "[a(1, 2)]",
                                    "[a(1, 1), b(0)]", "[a(1, 1)]", "[]"};
    std::vector<RuleTag> tags = {RuleTag::APP, RuleTag::VAR, RuleTag::DIST, RuleTag::ABS,
                                 RuleTag::VAR};
    for (size_t i = 0; i < seq.size(); ++i) {
        if (cl_measure(parse(seq[i])).str() != cls[i]) {
            err = std::string("CL of ") + seq[i] + " is " + cl_measure(parse(seq[i])).str();
            return false;
        }
    }
    Term cur = parse(seq[0]);
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
        if (!replay(cur, {{tags[i], seq[i + 1]}}, err)) return false;
        cur = parse(seq[i + 1]);
        if (!mul_greater(cl_measure(parse(seq[i])), cl_measure(cur))) {
            err = std::string("CL did not drop into ") + seq[i + 1];
            return false;
        }
    }
    return true;
}

void criterion1() {
    std::string err;
    bool ok = golden_rewrites(err) && golden_name(err) && golden_splitting(err) &&
              golden_flneed(err) && golden_cl(err);
    report(1, ok,
           "golden traces: replication runs, name run, both splittings, need run, CL values" +
               (ok ? std::string() : "  [" + err + "]"));
}

// --- criterion 2: CL monotonicity -------------------------------------------

void criterion2() {
    std::mt19937_64 rng(1002);
    FreshSupply supply;
    size_t subs = 0, pis = 0, violations = 0;
    while (subs < 10000) {
        Term t = gen_u_term(rng);
        OMeasure before = cl_measure(t);
        for (const Redex& r : r_redexes(t, false)) {
            if (!is_sub_rule(r.rule)) continue;
            ++subs;
            if (!mul_greater(before, cl_measure(fire(t, r, supply).after))) ++violations;
        }
        for (const Redex& r : pi_redexes(t)) {
            ++pis;
            if (!mul_geq(before, cl_measure(fire(t, r, supply).after))) ++violations;
        }
    }
    report(2, violations == 0,
           "CL strictly decreases on " + std::to_string(subs) + " sub steps, never rises on " +
               std::to_string(pis) + " permutation steps (" + std::to_string(violations) +
               " violations)");
}

// --- criterion 3: unfolding coherence ----------------------------------------

void criterion3() {
    std::mt19937_64 rng(1003);
    FreshSupply supply;
    size_t terms = 0, violations = 0;
    while (terms < 10000) {
        Term t = gen_u_term(rng, 9);
        ++terms;
        Term down = unfold(t);
        if (!alpha_eq(sub_normalize(t, supply), down)) ++violations;
        for (const Redex& r : pi_redexes(t))
            if (!alpha_eq(unfold(fire(t, r, supply).after), down)) ++violations;
        for (const Redex& r : r_redexes(t, false)) {
            if (!is_sub_rule(r.rule)) continue;
            if (!alpha_eq(unfold(fire(t, r, supply).after), down)) ++violations;
        }
    }
    report(3, violations == 0,
           "sub normalization equals the unfolding on " + std::to_string(terms) +
               " terms; permutation/sub steps preserve it (" + std::to_string(violations) +
               " violations)");
}

// --- criterion 4: beta simulation --------------------------------------------

void criterion4() {
    std::mt19937_64 rng(1004);
    size_t fired = 0, violations = 0;
    while (fired < 1000) {
        GenConfig cfg;
        cfg.seed = rng();
        cfg.max_size = 10;
        Term p = gen_term(cfg);
        auto rs = beta_redexes(p);
        if (rs.empty()) continue;
        const Path& at = rs[rng() % rs.size()];
        ++fired;
        FreshSupply s1, s2;
        Term want = beta_step_at(p, at, s1);
        auto steps = beta_expand_step(p, at, s2);
        if (steps.empty() || !alpha_eq(steps.back().after, want)) ++violations;
    }
    report(4, violations == 0,
           "one dB plus sub steps reproduce " + std::to_string(fired) +
               " oracle beta contractions (" + std::to_string(violations) + " violations)");
}

// --- criterion 5: diamond -----------------------------------------------------

void criterion5() {
    std::mt19937_64 rng(1005);
    size_t peaks = 0, violations = 0, compared = 0;
    while (peaks < 1000) {
        Term t = gen_u_term(rng);
        auto rs = name_redexes(t);
        if (rs.size() < 2) continue;
        FreshSupply supply;
        supply.reserve(all_names(t));
        std::vector<Term> reducts;
        for (auto& [k, r] : rs) {
            FreshSupply probe = supply;
            reducts.push_back(fire(t, r, probe).after);
        }
        bool counted = false;
        for (size_t a = 0; a < reducts.size(); ++a) {
            for (size_t b = a + 1; b < reducts.size(); ++b) {
                if (alpha_eq(reducts[a], reducts[b])) continue;
                counted = true;
                auto nexts = [&](const Term& u) {
                    std::vector<Term> out;
                    for (auto& [k, r] : name_redexes(u)) {
                        FreshSupply probe = supply;
                        out.push_back(fire(u, r, probe).after);
                    }
                    return out;
                };
                bool joined = false;
                for (const Term& x : nexts(reducts[a])) {
                    for (const Term& y : nexts(reducts[b]))
                        if (alpha_eq(x, y)) {
                            joined = true;
                            break;
                        }
                    if (joined) break;
                }
                if (!joined) ++violations;
            }
        }
        if (counted) ++peaks;
        // policies agree on length for normalizing samples
        if (compared < 300) {
            FreshSupply s1, s2;
            Trace a = name_normalize(t, 400, NamePolicy::PreferDB, s1);
            if (a.status == TraceStatus::NormalForm) {
                Trace b = name_normalize(t, 400, NamePolicy::PreferSub, s2);
                ++compared;
                if (b.status != TraceStatus::NormalForm || a.steps.size() != b.steps.size())
                    ++violations;
            }
        }
    }
    report(5, violations == 0,
           "one-step joins on " + std::to_string(peaks) + " peaks; policies agree on " +
               std::to_string(compared) + " normalizing runs (" + std::to_string(violations) +
               " violations)");
}

// --- criterion 6: skeleton correctness ---------------------------------------

// canonical form modulo permutation of independent trailing cuts: order the
// cuts by the position of their unique bound occurrence in the core
Term canonical_split(const Term& t) {
    Term lam = t;
    auto [core, cuts] = peel_list(lam.body());
    std::vector<std::pair<Path, Cut>> keyed;
    for (const Cut& c : cuts) {
        Path where;
        Path probe;
        bool found = false;
        auto rec = [&](auto&& self, const Term& u) -> void {
            if (found) return;
            if (u.is_var() && u.name() == c.binder) {
                where = probe;
                found = true;
                return;
            }
            switch (u.kind()) {
                case TermKind::Abs:
                    probe.push_back(Sel::AbsBody);
                    self(self, u.body());
                    probe.pop_back();
                    break;
                case TermKind::App:
                    probe.push_back(Sel::AppFun);
                    self(self, u.fun());
                    probe.back() = Sel::AppArg;
                    self(self, u.arg());
                    probe.pop_back();
                    break;
                default:
                    break;
            }
        };
        rec(rec, core);
        keyed.emplace_back(where, c);
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(b.first.begin(), b.first.end(), a.first.begin(),
                                            a.first.end());
    });
    Term body = core;
    for (auto& [k, c] : keyed) body = Term::cut(body, c.binder, c.content, c.kind);
    return Term::abs(lam.name(), body);
}

void criterion6() {
    std::mt19937_64 rng(1006);
    size_t terms = 0, violations = 0;
    // the displayed example list
    {
        auto mfes = mfe_list(U("(I y) I (\\z.z y w)"), {"y"});
        bool ok = mfes.size() == 3 && alpha_eq(mfes[0], U("I")) && alpha_eq(mfes[1], U("I")) &&
                  alpha_eq(mfes[2], parse("w"));
        if (!ok) ++violations;
    }
    while (terms < 1000) {
        GenConfig cfg;
        cfg.seed = rng();
        cfg.max_size = 9;
        Term p = gen_term(cfg);
        ++terms;
        NameSet theta = {"y"};
        if (!alpha_eq(plug_skeleton(skeleton(p, theta), mfe_list(p, theta)), p)) ++violations;

        FreshSupply s1;
        Term big = Term::abs("y", split_bigstep(p, theta, s1));
        FreshSupply s2;
        s2.reserve(all_names(p));
        s2.reserve(theta);
        Term small = st_normalize(Term::abs("y", Term::sub(Term::var("zz"), "zz", p)), s2);
        if (!alpha_eq(canonical_split(big), canonical_split(small))) ++violations;
    }
    report(6, violations == 0,
           "skeleton plugging and both splittings agree on " + std::to_string(terms) +
               " pure terms (" + std::to_string(violations) + " violations)");
}

// --- criterion 7: normal form characterizations ------------------------------

void criterion7() {
    std::mt19937_64 rng(1007);
    size_t terms = 0, violations = 0;
    FreshSupply supply;
    while (terms < 10000) {
        Term t = gen_u_term(rng, 9);
        ++terms;
        if (name_redexes(t).empty() != in_na(t)) ++violations;
        FreshSupply probe = supply;
        if (!flneed_step(t, probe).has_value() != in_ne(t)) ++violations;
    }
    report(7, violations == 0,
           "strategy normal forms coincide with the grammars on " + std::to_string(terms) +
               " terms (" + std::to_string(violations) + " violations)");
}

// --- criterion 8: type measures ----------------------------------------------

void criterion8() {
    bool ok = true;
    std::string err;
    try {
        ITypePtr tau = IType::base_type("t0");
        DerivPtr az = dv_ax("z", tau);
        DerivPtr yz = dv_app(dv_ax("y", IType::arrow({tau}, tau)),
                             dv_many({az}, Term::var("z")));
        DerivPtr phi_u = dv_cut(dv_ax("x", tau), "x", dv_many({yz}, parse("y z")),
                                TermKind::Sub);
        ok &= check_derivation(phi_u) && measure_d(phi_u) == Triple{1, 2, 3};

        DerivPtr app2 = dv_app(dv_ax("x1", IType::arrow({tau}, tau)),
                               dv_many({dv_ax("x2", tau)}, Term::var("x2")));
        DerivPtr c1 = dv_cut(app2, "x1",
                             dv_many({dv_ax("y", IType::arrow({tau}, tau))}, Term::var("y")),
                             TermKind::Sub);
        DerivPtr phi_u2 = dv_cut(c1, "x2", dv_many({dv_ax("z", tau)}, Term::var("z")),
                                 TermKind::Sub);
        ok &= check_derivation(phi_u2) && measure_d(phi_u2) == Triple{1, 1, 4};

        ITypePtr a = IType::answer();
        ITypePtr arr = IType::arrow({a}, a);
        auto ident = [&](ITypePtr in) { return dv_abs(dv_ax("i", in), "i"); };
        DerivPtr phi_x1I = dv_app(dv_ax("x1", arr),
                                  dv_many({dv_ans(parse("\\i.i"))}, parse("\\i.i")));
        DerivPtr lam_Iy =
            dv_abs(dv_app(ident(a), dv_many({dv_ax("y", a)}, Term::var("y"))), "y");
        DerivPtr left = dv_app(ident(a), dv_many({phi_x1I}, parse("x1 (\\i.i)")));
        DerivPtr d1 =
            dv_cut(left, "x1", dv_many({lam_Iy}, parse("\\y.(\\i.i) y")), TermKind::Sub);
        DerivPtr inner = dv_cut(dv_ax("x2", a), "x2", dv_many({phi_x1I}, parse("x1 (\\i.i)")),
                                TermKind::Sub);
        DerivPtr d2 =
            dv_cut(inner, "x1", dv_many({lam_Iy}, parse("\\y.(\\i.i) y")), TermKind::Sub);
        DerivPtr lam_zy = dv_abs(
            dv_app(dv_ax("z", arr), dv_many({dv_ax("y", a)}, Term::var("y"))), "y");
        DerivPtr mid = dv_cut(inner, "x1", dv_many({lam_zy}, parse("\\y.z y")),
                              TermKind::Dist);
        DerivPtr d3 = dv_cut(mid, "z", dv_many({ident(a)}, parse("\\i.i")), TermKind::Sub);
        ok &= check_derivation(d1) && check_derivation(d2) && check_derivation(d3);
        ok &= measure_d(d1) == Triple{7, 10, 4};
        ok &= measure_d(d2) == Triple{5, 13, 4};
        ok &= measure_d(d3) == Triple{5, 11, 5};
        ok &= measure_d(d1) > measure_d(d2) && measure_d(d2) > measure_d(d3);

        // the dB step from d1 to d2 is what expansion reconstructs
        RewriteStep w;
        w.rule = RuleTag::DB;
        w.path = {Sel::CutBody};
        w.binder = "x2";
        DerivPtr back = expand_rewrite(d2, w);
        ok &= check_derivation(back) && measure_d(back) == Triple{7, 10, 4};
    } catch (const std::exception& e) {
        ok = false;
        err = e.what();
    }
    report(8, ok, "displayed derivations measure (1,2,3), (1,1,4), (7,10,4), (5,13,4), (5,11,5)" +
                      (err.empty() ? std::string() : " [" + err + "]"));
}

// --- criterion 9: weighted subject reduction ---------------------------------

void criterion9() {
    std::mt19937_64 rng(1009);
    size_t typable = 0, violations = 0;
    while (typable < 500) {
        Term t = gen_u_term(rng);
        FreshSupply supply;
        std::optional<InferResult> r;
        try {
            r = infer(t, 300, supply);
        } catch (const std::exception&) {
            ++violations;
            break;
        }
        if (!r) continue;
        ++typable;
        // forward measures from the backward expansion
        std::vector<Triple> ds(r->trace.steps.size() + 1);
        Term nf = r->trace.final();
        DerivPtr d = is_answer(nf) ? type_normal_form(nf, IType::answer())
                                   : type_normal_form(nf, IType::base_type("o"));
        ds.back() = measure_d(d);
        for (size_t i = r->trace.steps.size(); i-- > 0;) {
            d = expand_strat(d, r->trace.steps[i]);
            ds[i] = measure_d(d);
        }
        for (size_t i = 0; i < r->trace.steps.size(); ++i) {
            switch (r->trace.steps[i].kind) {
                case StepKind::FL_DB:
                    if (!(ds[i].a > ds[i + 1].a && ds[i] > ds[i + 1])) ++violations;
                    break;
                case StepKind::FL_SPL:
                case StepKind::FL_LS:
                    if (!(ds[i] > ds[i + 1])) ++violations;
                    break;
                default:
                    if (!(ds[i] >= ds[i + 1])) ++violations;
                    break;
            }
        }
        // the first component bounds the dB steps of both strategies
        long long bound = measure_d(r->deriv).a;
        if ((long long)r->trace.db_count() > bound) ++violations;
        FreshSupply s2;
        Trace nm = name_normalize(t, 5000, NamePolicy::PreferDB, s2);
        if (nm.status != TraceStatus::NormalForm || (long long)nm.db_count() > bound)
            ++violations;
    }
    report(9, violations == 0,
           "measures fall monotonically along " + std::to_string(typable) +
               " inferred runs; D bounds both strategies' dB counts (" +
               std::to_string(violations) + " violations)");
}

// --- criterion 10: normalization equivalence ----------------------------------

void criterion10() {
    std::mt19937_64 rng(1010);
    size_t terms = 0, violations = 0;
    while (terms < 500) {
        Term t = gen_u_term(rng, 9);
        ++terms;
        FreshSupply s1, s2, s3;
        auto r = infer(t, 400, s1);
        size_t fuel =
            r ? 4 * static_cast<size_t>(std::max<long long>(8 * measure_d(r->deriv).a, 64))
              : 10000;
        bool name_ok = name_normalize(t, fuel, NamePolicy::PreferDB, s2).status ==
                       TraceStatus::NormalForm;
        bool need_ok = flneed_normalize(t, fuel, s3).status == TraceStatus::NormalForm;
        if (r.has_value() != name_ok || name_ok != need_ok) ++violations;
    }
    // the looping family fails all three ways
    for (const char* omega :
         {"(\\x.x x)(\\x.x x)", "(\\x.x x x)(\\x.x x x)", "(\\x.x x)(\\x.x x) (\\i.i)"}) {
        Term t = parse(omega);
        FreshSupply s1, s2, s3;
        if (infer(t, 300, s1).has_value()) ++violations;
        if (name_normalize(t, 2000, NamePolicy::PreferDB, s2).status ==
            TraceStatus::NormalForm)
            ++violations;
        if (flneed_normalize(t, 2000, s3).status == TraceStatus::NormalForm) ++violations;
    }
    report(10, violations == 0,
           "typability, name termination and need termination coincide on " +
               std::to_string(terms) + " terms plus the looping family (" +
               std::to_string(violations) + " violations)");
}

// --- criterion 11: the level-shift identity ------------------------------------

void criterion11() {
    std::mt19937_64 rng(1011);
    size_t checked = 0, violations = 0;
    while (checked < 200) {
        Term t = gen_u_term(rng);
        FreshSupply supply;
        auto r = infer(t, 300, supply);
        if (!r) continue;
        ++checked;
        long long sz = (long long)deriv_size(r->deriv);
        for (int k = 0; k < 6; ++k) {
            long long n = 1 + (long long)(rng() % 5);
            long long m = n + 1 + (long long)(rng() % 5);
            if (!(measure_m(r->deriv, m) - measure_m(r->deriv, n) ==
                  Triple{0, (m - n) * sz, 0}))
                ++violations;
        }
    }
    report(11, violations == 0,
           "level shift identity exact on " + std::to_string(checked) + " derivations (" +
               std::to_string(violations) + " violations)");
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    if (g_failures) {
        std::cout << g_failures << " criteria failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
