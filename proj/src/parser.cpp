// Recursive-descent parser for threat rules.
//
// Precedence from loosest to tightest: implies, or, and, not. A quantifier
// body extends as far right as possible, so `exists element e . A or B`
// binds both disjuncts.

#include <cctype>
#include <set>

#include "threatfix/error.hpp"
#include "threatfix/formula.hpp"

namespace threatfix {

namespace {

enum class Tok { Ident, String, LParen, RParen, Comma, Dot, Colon, Eq, Neq, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t col;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '\'';
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        const std::size_t l = line;
        const std::size_t cl = col;
        if (c == '"') {
            std::string text;
            advance(1);
            bool closed = false;
            while (i < src.size()) {
                const char d = src[i];
                if (d == '"') {
                    advance(1);
                    closed = true;
                    break;
                }
                if (d == '\n') break;
                if (d == '\\' && i + 1 < src.size()) {
                    text.push_back(src[i + 1]);
                    advance(2);
                    continue;
                }
                text.push_back(d);
                advance(1);
            }
            if (!closed) throw ParseError("unterminated string literal", l, cl);
            out.push_back({Tok::String, std::move(text), l, cl});
            continue;
        }
        if (ident_start(c) || std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = i;
            while (i < src.size() && ident_char(src[i])) advance(1);
            out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), l, cl});
            continue;
        }
        Tok kind;
        std::size_t len = 1;
        switch (c) {
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case ',': kind = Tok::Comma; break;
            case '.': kind = Tok::Dot; break;
            case ':': kind = Tok::Colon; break;
            case '=': kind = Tok::Eq; break;
            case '!':
                if (i + 1 < src.size() && src[i + 1] == '=') {
                    kind = Tok::Neq;
                    len = 2;
                    break;
                }
                [[fallthrough]];
            default: throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
        }
        out.push_back({kind, std::string(src.substr(i, len)), l, cl});
        advance(len);
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

const std::set<std::string, std::less<>> kKeywords = {
    "exists", "forall", "not",       "and",       "or",    "implies", "in",       "type",
    "val",    "src",    "tgt",       "connector", "crosses", "contained", "holds", "element",
    "asset",  "boundary", "path",    "rule"};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::String: return "string \"" + t.text + "\"";
        default: return "'" + t.text + "'";
    }
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Formula formula() { return implies(); }

    bool at_end() const { return peek().kind == Tok::End; }
    bool at_keyword(std::string_view kw) const { return is_keyword(peek(), kw); }
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    Token take() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }

    [[noreturn]] void fail(const std::string& what, const Token& at) const {
        throw ParseError(what + ", found " + describe(at), at.line, at.col);
    }

    Token expect(Tok kind, std::string_view what) {
        if (peek().kind != kind) fail("expected " + std::string(what), peek());
        return take();
    }

    void expect_keyword(std::string_view kw) {
        if (!at_keyword(kw)) fail("expected '" + std::string(kw) + "'", peek());
        take();
    }

private:
    static bool is_keyword(const Token& t, std::string_view kw) { return t.kind == Tok::Ident && t.text == kw; }

    Formula implies() {
        Formula lhs = disjunction();
        if (at_keyword("implies")) {
            take();
            return Formula::implication(std::move(lhs), implies());
        }
        return lhs;
    }

    Formula disjunction() {
        Formula lhs = conjunction();
        while (at_keyword("or")) {
            take();
            lhs = Formula::disjunction(std::move(lhs), conjunction());
        }
        return lhs;
    }

    Formula conjunction() {
        Formula lhs = unary();
        while (at_keyword("and")) {
            take();
            lhs = Formula::conjunction(std::move(lhs), unary());
        }
        return lhs;
    }

    Formula unary() {
        const Token& t = peek();
        if (is_keyword(t, "not")) {
            take();
            return Formula::negation(unary());
        }
        if (is_keyword(t, "exists") || is_keyword(t, "forall")) return quantifier();
        if (t.kind == Tok::LParen) {
            take();
            Formula f = formula();
            expect(Tok::RParen, "')'");
            return f;
        }
        return predicate();
    }

    Formula quantifier() {
        const bool universal = take().text == "forall";
        const Token s = expect(Tok::Ident, "a sort");
        Sort sort;
        if (s.text == "element") sort = Sort::Element;
        else if (s.text == "connector") sort = Sort::Connector;
        else if (s.text == "asset") sort = Sort::Asset;
        else if (s.text == "boundary") sort = Sort::Boundary;
        else if (s.text == "path") sort = Sort::Path;
        else fail("expected a sort (element, connector, asset, boundary, path)", s);

        const Token name = expect(Tok::Ident, "a variable name");
        if (kKeywords.contains(name.text)) fail("expected a variable name", name);
        expect(Tok::Dot, "'.'");

        Var v{name.text, sort};
        scope_.push_back(v);
        Formula body = formula();
        scope_.pop_back();
        return universal ? Formula::forall(std::move(v), std::move(body))
                         : Formula::exists(std::move(v), std::move(body));
    }

    Var variable(const std::string& pred) {
        const Token t = expect(Tok::Ident, "a variable");
        if (kKeywords.contains(t.text)) fail("expected a variable", t);
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
            if (it->name == t.text) return *it;
        }
        throw SortError(std::to_string(t.line) + ":" + std::to_string(t.col) + ": unbound variable '" + t.text +
                        "' in " + pred + "(...)");
    }

    // `=` or `!=`; returns true for `!=`.
    bool comparison() {
        if (peek().kind == Tok::Eq) {
            take();
            return false;
        }
        if (peek().kind == Tok::Neq) {
            take();
            return true;
        }
        fail("expected '=' or '!='", peek());
    }

    Formula checked(Predicate p, const Token& at) {
        Formula f = Formula::predicate(std::move(p));
        try {
            check_sorts(f);
        } catch (const SortError& e) {
            throw SortError(std::to_string(at.line) + ":" + std::to_string(at.col) + ": " + e.what());
        }
        return f;
    }

    Formula predicate() {
        const Token head = peek();
        if (head.kind != Tok::Ident) fail("expected a formula", head);
        Predicate p;
        const std::string& w = head.text;

        if (w == "type" || w == "val" || w == "src" || w == "tgt") {
            take();
            expect(Tok::LParen, "'('");
            p.subject = variable(w);
            if (w == "val") {
                expect(Tok::Comma, "','");
                p.attribute = expect(Tok::String, "an attribute name string").text;
            }
            expect(Tok::RParen, "')'");
            if (w == "src" || w == "tgt") {
                p.kind = w == "src" ? PredicateKind::Src : PredicateKind::Tgt;
                expect(Tok::Eq, "'='");
                p.object = variable(w);
                return checked(std::move(p), head);
            }
            p.kind = w == "type" ? PredicateKind::Type : PredicateKind::Val;
            const bool negated = comparison();
            p.literal = expect(Tok::String, "a string literal").text;
            Formula f = checked(std::move(p), head);
            return negated ? Formula::negation(std::move(f)) : f;
        }

        if (w == "connector" || w == "crosses" || w == "contained" || w == "holds") {
            take();
            p.kind = w == "connector"   ? PredicateKind::Connector
                     : w == "crosses"   ? PredicateKind::Crosses
                     : w == "contained" ? PredicateKind::Contained
                                        : PredicateKind::Holds;
            expect(Tok::LParen, "'('");
            p.subject = variable(w);
            expect(Tok::Comma, "','");
            p.object = variable(w);
            expect(Tok::RParen, "')'");
            return checked(std::move(p), head);
        }

        if (is_keyword(peek(1), "in") && !kKeywords.contains(w)) {
            p.kind = PredicateKind::In;
            p.subject = variable("in");
            take();
            p.object = variable("in");
            return checked(std::move(p), head);
        }
        fail("expected a formula", head);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<Var> scope_;
};

}  // namespace

Formula parse_rule(std::string_view text) {
    Parser p(tokenize(text));
    Formula f = p.formula();
    if (!p.at_end()) p.fail("expected end of formula", p.peek());
    return f;
}

RuleSet parse_rules(std::string_view text) {
    Parser p(tokenize(text));
    RuleSet out;
    std::set<std::string> names;
    while (!p.at_end()) {
        p.expect_keyword("rule");
        const Token name = p.peek();
        if (name.kind != Tok::Ident && name.kind != Tok::String) p.fail("expected a rule name", name);
        p.take();
        p.expect(Tok::Colon, "':'");
        if (!names.insert(name.text).second) {
            throw ParseError("duplicate rule name '" + name.text + "'", name.line, name.col);
        }
        Formula f = p.formula();
        if (!p.at_end() && !p.at_keyword("rule")) p.fail("expected 'rule' or end of file", p.peek());
        out.push_back({name.text, std::move(f)});
    }
    return out;
}

}  // namespace threatfix
