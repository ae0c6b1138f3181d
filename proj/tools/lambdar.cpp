// Command-line workbench: parse terms, reduce under either weak strategy,
// print measures and traces, check grammars and derivations, infer types,
// run differential probes.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "lambdar/json_io.hpp"

using namespace lambdar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitFuel = 2;

struct Options {
    std::string term_arg;
    size_t fuel = 10000;
    std::string format = "text";
    uint64_t seed = 0;
    std::string policy = "prefer-db";
    bool unicode = false;
};

std::string slurp(std::istream& in) {
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Term read_term(const std::string& arg) {
    if (arg == "-") return parse(slurp(std::cin));
    if (!arg.empty() && arg[0] == '@') {
        std::ifstream f(arg.substr(1));
        if (!f) throw std::runtime_error("cannot open " + arg.substr(1));
        return parse(slurp(f));
    }
    return parse(arg);
}

NamePolicy parse_policy(const std::string& s) {
    if (s == "prefer-db") return NamePolicy::PreferDB;
    if (s == "prefer-sub") return NamePolicy::PreferSub;
    if (s == "leftmost") return NamePolicy::Leftmost;
    throw std::runtime_error("unknown policy " + s);
}

void print_step(const Options& opt, size_t n, const std::string& tag, bool strategy,
                const Path& path, const Term& after) {
    if (opt.format == "json") {
        std::cout << step_json(n, tag, strategy, path, after, opt.unicode).dump() << "\n";
    } else {
        std::cout << n << ". [" << tag << "] " << print(after, opt.unicode) << "\n";
    }
}

void print_status(const Options& opt, TraceStatus status, const Term& final_term) {
    if (opt.format == "json") {
        json j;
        j["status"] = status == TraceStatus::NormalForm ? "normal-form" : "fuel-exhausted";
        j["term"] = print(final_term, opt.unicode);
        std::cout << j.dump() << "\n";
    } else {
        std::cout << (status == TraceStatus::NormalForm ? "normal form: " : "fuel exhausted: ")
                  << print(final_term, opt.unicode) << "\n";
    }
}

int run_reduce(const Options& opt, const std::string& strategy, size_t depth) {
    Term t = read_term(opt.term_arg);
    FreshSupply supply(opt.seed);

    if (strategy == "name") {
        Trace tr = name_normalize(t, opt.fuel, parse_policy(opt.policy), supply);
        size_t n = 0;
        for (const StratStep& s : tr.steps)
            print_step(opt, ++n, step_name(s.kind), true, s.path, s.after);
        print_status(opt, tr.status, tr.final());
        return tr.status == TraceStatus::NormalForm ? kExitOk : kExitFuel;
    }
    if (strategy == "flneed") {
        Trace tr = flneed_normalize(t, opt.fuel, supply);
        size_t n = 0;
        for (const StratStep& s : tr.steps)
            print_step(opt, ++n, step_name(s.kind), true, s.path, s.after);
        print_status(opt, tr.status, tr.final());
        return tr.status == TraceStatus::NormalForm ? kExitOk : kExitFuel;
    }
    if (strategy == "sub") {
        std::vector<RewriteStep> steps;
        Term nf = sub_normalize(t, supply, opt.fuel, &steps);
        size_t n = 0;
        for (const RewriteStep& s : steps)
            print_step(opt, ++n, rule_name(s.rule), false, s.path, s.after);
        print_status(opt, TraceStatus::NormalForm, nf);
        return kExitOk;
    }
    if (strategy == "st") {
        std::vector<StratStep> steps;
        Term nf = st_normalize(t, supply, &steps, opt.fuel);
        size_t n = 0;
        for (const StratStep& s : steps)
            print_step(opt, ++n, step_name(s.kind), true, s.path, s.after);
        print_status(opt, TraceStatus::NormalForm, nf);
        return kExitOk;
    }
    if (strategy == "r-explore") {
        ConfluenceReport rep = confluence_probe(t, depth, supply);
        if (opt.format == "json") {
            json j;
            j["endpoints"] = rep.endpoints;
            j["violation"] = rep.violation;
            j["inconclusive"] = rep.inconclusive;
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "endpoints: " << rep.endpoints << "\n";
            if (rep.violation)
                std::cout << "VIOLATION: " << rep.detail << "\n";
            else if (rep.inconclusive)
                std::cout << "inconclusive: some projections did not normalize in fuel\n";
            else
                std::cout << "confluent: all endpoints project to one normal form\n";
        }
        if (rep.violation) return kExitUser;
        return rep.inconclusive ? kExitFuel : kExitOk;
    }
    throw std::runtime_error("unknown strategy " + strategy);
}

int run_measure(const Options& opt, const std::string& kind) {
    Term t = read_term(opt.term_arg);
    if (kind == "cl") {
        std::cout << cl_measure(t).str() << "\n";
        return kExitOk;
    }
    if (kind == "level") {
        if (opt.format == "json") {
            std::cout << levels_json(t).dump() << "\n";
        } else {
            for (const Name& x : free_vars(t))
                std::cout << x << ": " << level(t, x) << "\n";
        }
        return kExitOk;
    }
    if (kind == "d") {
        FreshSupply supply(opt.seed);
        auto r = infer(t, opt.fuel, supply);
        if (!r) {
            std::cout << "no derivation found within fuel\n";
            return kExitFuel;
        }
        std::cout << measure_d(r->deriv).str() << "\n";
        return kExitOk;
    }
    throw std::runtime_error("unknown measure kind " + kind);
}

int run_skeleton(const Options& opt, const std::string& mode,
                 const std::vector<std::string>& theta_list) {
    Term t = read_term(opt.term_arg);
    NameSet theta(theta_list.begin(), theta_list.end());
    FreshSupply supply(opt.seed);
    if (mode == "mfe") {
        auto mfes = mfe_list(t, theta);
        std::string out = "[";
        for (size_t i = 0; i < mfes.size(); ++i) {
            if (i) out += "; ";
            out += print(mfes[i], opt.unicode);
        }
        std::cout << out << "]\n";
        return kExitOk;
    }
    if (mode == "bigstep") {
        std::cout << print(split_bigstep(t, theta, supply), opt.unicode) << "\n";
        return kExitOk;
    }
    if (mode == "smallstep") {
        Term input = t;
        if (!theta.empty()) {
            if (theta.size() != 1)
                throw std::runtime_error("small-step splitting takes a single variable");
            Name y = *theta.begin();
            NameSet avoid = all_names(t);
            avoid.insert(y);
            supply.reserve(avoid);
            Name z = supply.fresh("z", avoid);
            input = Term::abs(y, Term::sub(Term::var(z), z, t));
        }
        std::cout << print(st_normalize(input, supply), opt.unicode) << "\n";
        return kExitOk;
    }
    if (mode == "skeleton") {
        std::cout << print(skeleton(t, theta), opt.unicode) << "\n";
        return kExitOk;
    }
    throw std::runtime_error("unknown skeleton mode " + mode);
}

GrammarTag parse_grammar(const std::string& s) {
    if (s == "pure") return GrammarTag::Pure;
    if (s == "u") return GrammarTag::U;
    if (s == "t") return GrammarTag::T;
    if (s == "ll") return GrammarTag::LL;
    if (s == "value") return GrammarTag::Value;
    if (s == "answer") return GrammarTag::Answer;
    if (s == "na") return GrammarTag::Na;
    if (s == "ne") return GrammarTag::Ne;
    throw std::runtime_error("unknown grammar " + s);
}

int run_check(const Options& opt, const std::string& grammar, const std::string& deriv_file) {
    if (!deriv_file.empty()) {
        std::ifstream f(deriv_file);
        if (!f) throw std::runtime_error("cannot open " + deriv_file);
        json j = json::parse(slurp(f));
        DerivPtr d;
        try {
            d = deriv_from_json(j);
        } catch (const std::exception& e) {
            std::cout << "invalid: " << e.what() << "\n";
            return kExitUser;
        }
        std::string diag;
        if (!check_derivation(d, &diag)) {
            std::cout << "invalid: " << diag << "\n";
            return kExitUser;
        }
        std::cout << "valid derivation of  " << env_str(d->env) << " |- "
                  << print(d->subject, opt.unicode) << " : "
                  << (d->is_many() ? multi_str(d->multi) : type_str(d->type)) << "\n";
        return kExitOk;
    }
    Term t = read_term(opt.term_arg);
    bool ok = check_grammar(t, parse_grammar(grammar));
    std::cout << (ok ? "true" : "false") << "\n";
    return kExitOk;
}

int run_infer(const Options& opt) {
    Term t = read_term(opt.term_arg);
    FreshSupply supply(opt.seed);
    auto r = infer(t, opt.fuel, supply);
    if (!r) {
        std::cout << "no derivation found within fuel\n";
        return kExitFuel;
    }
    if (opt.format == "json") {
        json j = deriv_json(r->deriv);
        j["measure"] = measure_d(r->deriv).str();
        std::cout << j.dump(2) << "\n";
    } else {
        deriv_text(r->deriv, std::cout);
        std::cout << "D = " << measure_d(r->deriv).str() << "\n";
    }
    return kExitOk;
}

int run_diff(const Options& opt) {
    Term t = read_term(opt.term_arg);
    FreshSupply s1(opt.seed), s2(opt.seed), s3(opt.seed);
    auto r = infer(t, opt.fuel, s1);
    size_t fuel =
        r ? 4 * static_cast<size_t>(std::max<long long>(8 * measure_d(r->deriv).a, 64))
          : opt.fuel;
    Trace nm = name_normalize(t, fuel, parse_policy(opt.policy), s2);
    Trace fl = flneed_normalize(t, fuel, s3);
    bool name_ok = nm.status == TraceStatus::NormalForm;
    bool need_ok = fl.status == TraceStatus::NormalForm;
    std::cout << "infer:  " << (r ? "derivation with D = " + measure_d(r->deriv).str()
                                  : "none within fuel")
              << "\n";
    std::cout << "name:   "
              << (name_ok ? "normal form in " + std::to_string(nm.steps.size()) + " steps"
                          : "fuel exhausted")
              << "\n";
    std::cout << "flneed: "
              << (need_ok ? "normal form in " + std::to_string(fl.steps.size()) + " steps"
                          : "fuel exhausted")
              << "\n";
    if (r.has_value() != name_ok || name_ok != need_ok) {
        std::cout << "DISAGREEMENT\n";
        return kExitUser;
    }
    if (r && name_ok) {
        long long bound = measure_d(r->deriv).a;
        if ((long long)nm.db_count() > bound || (long long)fl.db_count() > bound) {
            std::cout << "BOUND VIOLATION: dB steps exceed the derivation measure\n";
            return kExitUser;
        }
    }
    std::cout << (r ? "consistent: all three normalize" : "consistent: all three diverge")
              << "\n";
    return r || (!name_ok && !need_ok) ? kExitOk : kExitUser;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for a lambda calculus with node replication"};
    app.require_subcommand(1);

    Options opt;
    std::string strategy = "name", kind = "cl", mode = "mfe", grammar = "u", deriv_file;
    std::vector<std::string> theta;
    size_t depth = 2;

    auto add_common = [&](CLI::App* c, bool with_term = true) {
        if (with_term)
            c->add_option("term", opt.term_arg, "term, '-' for stdin, or @file")->required();
        c->add_option("--fuel", opt.fuel, "step budget (default 10000)");
        c->add_option("--format", opt.format, "text or json")
            ->check(CLI::IsMember({"text", "json"}));
        c->add_option("--seed", opt.seed, "fresh-name supply seed (default 0)");
        c->add_option("--policy", opt.policy, "name redex policy")
            ->check(CLI::IsMember({"prefer-db", "prefer-sub", "leftmost"}));
        c->add_flag("--unicode", opt.unicode, "print lambda and holes as unicode");
    };

    CLI::App* reduce = app.add_subcommand("reduce", "evaluate a term, printing the trace");
    reduce->add_option("--strategy", strategy, "name, flneed, sub, st or r-explore")
        ->check(CLI::IsMember({"name", "flneed", "sub", "st", "r-explore"}));
    reduce->add_option("--depth", depth, "exploration depth for r-explore");
    add_common(reduce);

    CLI::App* measure = app.add_subcommand("measure", "print a measure of the term");
    measure->add_option("--kind", kind, "level, cl or d")
        ->check(CLI::IsMember({"level", "cl", "d"}));
    add_common(measure);

    CLI::App* skel = app.add_subcommand("skeleton", "splitting machinery on pure terms");
    skel->add_option("--mode", mode, "mfe, skeleton, bigstep or smallstep")
        ->check(CLI::IsMember({"mfe", "skeleton", "bigstep", "smallstep"}));
    skel->add_option("--theta", theta, "comma-separated variable set")->delimiter(',');
    add_common(skel);

    CLI::App* check = app.add_subcommand("check", "grammar membership or derivation validity");
    check->add_option("--grammar", grammar, "pure, u, t, ll, value, answer, na or ne");
    check->add_option("--derivation", deriv_file, "derivation JSON file");
    check->add_option("term", opt.term_arg, "term, '-' for stdin, or @file");
    check->add_option("--fuel", opt.fuel, "unused");
    check->add_flag("--unicode", opt.unicode, "unicode output");

    CLI::App* inf = app.add_subcommand("infer", "reconstruct a typing derivation");
    add_common(inf);

    CLI::App* diff = app.add_subcommand("diff", "differential normalization probe");
    add_common(diff);

    CLI11_PARSE(app, argc, argv);

    try {
        if (reduce->parsed()) return run_reduce(opt, strategy, depth);
        if (measure->parsed()) return run_measure(opt, kind);
        if (skel->parsed()) return run_skeleton(opt, mode, theta);
        if (check->parsed()) return run_check(opt, grammar, deriv_file);
        if (inf->parsed()) return run_infer(opt);
        if (diff->parsed()) return run_diff(opt);
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    }
    return kExitUser;
}
