#pragma once

// JSON-lines trace records and derivation (de)serialization.

#include <json.hpp>

#include "lambdar/expand.hpp"

namespace lambdar {

using json = nlohmann::json;

inline const char* sel_name(Sel s) {
    switch (s) {
        case Sel::AbsBody: return "abs-body";
        case Sel::AppFun: return "app-fun";
        case Sel::AppArg: return "app-arg";
        case Sel::CutBody: return "cut-body";
        case Sel::CutContent: return "cut-content";
    }
    return "?";
}

inline json path_json(const Path& p) {
    json a = json::array();
    for (Sel s : p) a.push_back(sel_name(s));
    return a;
}

inline json levels_json(const Term& t) {
    json m = json::object();
    for (const Name& x : free_vars(t)) m[x] = level(t, x);
    return m;
}

// {"step": n, "rule"/"kind": tag, "path": [...], "term": ..., "cl": ..., "lv": {...}}
inline json step_json(size_t n, const std::string& tag, bool strategy, const Path& path,
                      const Term& after, bool unicode) {
    json j;
    j["step"] = n;
    j[strategy ? "kind" : "rule"] = tag;
    j["path"] = path_json(path);
    j["term"] = print(after, unicode);
    j["cl"] = cl_measure(after).str();
    j["lv"] = levels_json(after);
    return j;
}

// --- types ------------------------------------------------------------------

namespace detail {

struct TypeParser {
    std::string_view s;
    size_t i = 0;

    void ws() {
        while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
    }
    bool eat(char c) {
        ws();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& m) { throw DerivError("type syntax: " + m); }

    MultiType multi() {
        if (!eat('[')) fail("expected '['");
        MultiType m;
        ws();
        if (eat(']')) return m;
        for (;;) {
            m.push_back(type());
            if (eat(']')) break;
            if (!eat(',')) fail("expected ',' or ']'");
        }
        multi_sort(m);
        return m;
    }

    ITypePtr atom() {
        ws();
        if (i < s.size() && s[i] == '[') {
            MultiType dom = multi();
            ws();
            if (!(eat('-') && eat('>'))) fail("expected '->'");
            return IType::arrow(std::move(dom), type());
        }
        size_t start = i;
        while (i < s.size() && (std::isalnum((unsigned char)s[i]) || s[i] == '_' ||
                                s[i] == '\''))
            ++i;
        if (start == i) fail("expected a type");
        std::string name(s.substr(start, i - start));
        if (name == "a") return IType::answer();
        return IType::base_type(name);
    }

    ITypePtr type() { return atom(); }
};

}  // namespace detail

inline ITypePtr parse_type(std::string_view s) {
    detail::TypeParser p{s};
    ITypePtr t = p.type();
    p.ws();
    if (p.i != s.size()) throw DerivError("trailing characters in type");
    return t;
}

// --- derivations -------------------------------------------------------------

inline json deriv_json(const DerivPtr& d) {
    json j;
    j["rule"] = trule_name(d->rule);
    j["subject"] = print(d->subject);
    if (d->is_many()) {
        j["multi"] = multi_str(d->multi);
    } else {
        j["type"] = type_str(d->type);
    }
    json env = json::object();
    for (auto& [k, v] : d->env) env[k] = multi_str(v);
    j["env"] = env;
    json ps = json::array();
    for (const DerivPtr& p : d->premises) ps.push_back(deriv_json(p));
    j["premises"] = std::move(ps);
    return j;
}

inline MultiType parse_multi(std::string_view s) {
    detail::TypeParser p{s};
    MultiType m = p.multi();
    p.ws();
    if (p.i != s.size()) throw DerivError("trailing characters in multiset");
    return m;
}

// Rebuilds a derivation from JSON.  Environments and types of inner nodes
// are recomputed; the declared ones are validated by check_derivation.
inline DerivPtr deriv_from_json(const json& j) {
    std::string rule = j.at("rule");
    Term subject = parse(j.at("subject").get<std::string>());
    std::vector<DerivPtr> ps;
    for (const json& p : j.at("premises")) ps.push_back(deriv_from_json(p));
    DerivPtr d;
    if (rule == "AX")
        d = dv_ax(subject.name(), parse_type(j.at("type").get<std::string>()));
    else if (rule == "ANS")
        d = dv_ans(subject);
    else if (rule == "ABS")
        d = dv_abs(ps.at(0), subject.name());
    else if (rule == "APP")
        d = dv_app(ps.at(0), ps.at(1));
    else if (rule == "CUT")
        d = dv_cut(ps.at(0), subject.name(), ps.at(1), subject.kind());
    else if (rule == "MANY")
        d = dv_many(std::move(ps), subject);
    else
        throw DerivError("unknown rule " + rule);
    // declared conclusions must agree with the recomputed ones
    if (j.contains("type") && !type_eq(d->type, parse_type(j.at("type").get<std::string>())))
        throw DerivError("declared type disagrees with the premises");
    if (j.contains("multi") && !multi_eq(d->multi, parse_multi(j.at("multi").get<std::string>())))
        throw DerivError("declared multiset disagrees with the premises");
    if (j.contains("env")) {
        Env declared;
        for (auto& [k, v] : j.at("env").items())
            declared[k] = parse_multi(v.get<std::string>());
        if (!env_eq(d->env, declared))
            throw DerivError("declared environment disagrees with the premises");
    }
    return d;
}

// Indented text rendering of a derivation tree.
inline void deriv_text(const DerivPtr& d, std::ostream& os, int indent = 0) {
    os << std::string(static_cast<size_t>(indent) * 2, ' ') << trule_name(d->rule) << "  "
       << env_str(d->env) << " |- " << print(d->subject) << " : "
       << (d->is_many() ? multi_str(d->multi) : type_str(d->type)) << "\n";
    for (const DerivPtr& p : d->premises) deriv_text(p, os, indent + 1);
}

}  // namespace lambdar
