#pragma once

// Concrete syntax.
//
//   term := abs | app
//   abs  := ('\' | 'λ') ident '.' term
//   app  := atom+ [abs]              (left-associative)
//   atom := (ident | '(' term ')') cut*
//   cut  := '[' ident '/' term ']' | '[' ident '//' term ']'
//
// A cut binds tighter than application: "t u[x/s]" is t (u[x/s]).
// An abstraction body extends as far right as possible.

#include <sstream>
#include <string>

#include "lambdar/term.hpp"

namespace lambdar {

struct ParseError : std::runtime_error {
    size_t line, col;
    ParseError(size_t line, size_t col, const std::string& msg)
        : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                             std::to_string(col) + ": " + msg),
          line(line),
          col(col) {}
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Term parse_term_eof() {
        Term t = parse_term();
        skip_ws();
        if (pos_ != src_.size()) fail("expected end of input");
        return t;
    }

private:
    std::string_view src_;
    size_t pos_ = 0, line_ = 1, col_ = 1;

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(line_, col_, msg); }

    void advance(size_t n) {
        for (size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
        }
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            advance(1);
    }

    bool at_lambda() {
        if (pos_ < src_.size() && src_[pos_] == '\\') return true;
        // UTF-8 lambda
        return pos_ + 1 < src_.size() && static_cast<unsigned char>(src_[pos_]) == 0xCE &&
               static_cast<unsigned char>(src_[pos_ + 1]) == 0xBB;
    }

    void eat_lambda() { advance(src_[pos_] == '\\' ? 1 : 2); }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    void expect(char c, const char* what) {
        if (!peek(c)) fail(std::string("expected ") + what);
        advance(1);
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }

    Name parse_ident() {
        skip_ws();
        if (pos_ >= src_.size() || !ident_start(src_[pos_])) fail("expected identifier");
        size_t start = pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_])) advance(1);
        return Name(src_.substr(start, pos_ - start));
    }

    Term parse_term() {
        skip_ws();
        if (at_lambda()) return parse_abs();
        return parse_app();
    }

    Term parse_abs() {
        eat_lambda();
        Name x = parse_ident();
        expect('.', "'.' after binder");
        return Term::abs(x, parse_term());
    }

    Term parse_app() {
        Term t = parse_atom();
        for (;;) {
            skip_ws();
            if (pos_ >= src_.size()) break;
            if (at_lambda()) {
                t = Term::app(t, parse_abs());
                break;
            }
            char c = src_[pos_];
            if (c == ')' || c == ']') break;
            if (c == '(' || ident_start(c)) {
                t = Term::app(t, parse_atom());
                continue;
            }
            fail("unexpected character");
        }
        return t;
    }

    Term parse_atom() {
        skip_ws();
        Term t;
        if (peek('(')) {
            advance(1);
            t = parse_term();
            expect(')', "')'");
        } else {
            t = Term::var(parse_ident());
        }
        while (peek('[')) {
            advance(1);
            Name x = parse_ident();
            expect('/', "'/' in cut");
            bool dist = false;
            if (pos_ < src_.size() && src_[pos_] == '/') {
                advance(1);
                dist = true;
            }
            Term content = parse_term();
            expect(']', "']'");
            if (dist) {
                if (content.kind() != TermKind::Abs)
                    fail("distributor content must be an abstraction");
                t = Term::dist(t, x, content);
            } else {
                t = Term::sub(t, x, content);
            }
        }
        return t;
    }
};

// levels: 0 = term, 1 = application operand position, 2 = atom
inline void print_rec(std::ostream& os, const Term& t, int level, bool unicode) {
    switch (t.kind()) {
        case TermKind::Var:
            os << t.name();
            return;
        case TermKind::Hole:
            os << (unicode ? "\xE2\x8B\x84" : "<>");
            return;
        case TermKind::Abs: {
            bool paren = level > 0;
            if (paren) os << '(';
            os << (unicode ? "\xCE\xBB" : "\\") << t.name() << '.';
            print_rec(os, t.body(), 0, unicode);
            if (paren) os << ')';
            return;
        }
        case TermKind::App: {
            bool paren = level > 1;
            if (paren) os << '(';
            print_rec(os, t.fun(), 1, unicode);
            os << ' ';
            print_rec(os, t.arg(), 2, unicode);
            if (paren) os << ')';
            return;
        }
        case TermKind::Sub:
        case TermKind::Dist: {
            print_rec(os, t.body(), 2, unicode);
            os << '[' << t.name() << (t.is_dist() ? "//" : "/");
            print_rec(os, t.content(), 0, unicode);
            os << ']';
            return;
        }
    }
}

}  // namespace detail

inline Term parse(std::string_view text) { return detail::Parser(text).parse_term_eof(); }

inline std::string print(const Term& t, bool unicode = false) {
    std::ostringstream os;
    detail::print_rec(os, t, 0, unicode);
    return os.str();
}

}  // namespace lambdar
