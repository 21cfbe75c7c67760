#include "sdq/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace sdq {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

// U+2212 MINUS SIGN
bool is_unicode_minus(std::string_view s, size_t i) {
    return s.size() >= i + 3 && (unsigned char)s[i] == 0xE2 && (unsigned char)s[i + 1] == 0x88 &&
           (unsigned char)s[i + 2] == 0x92;
}

int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Pow: return 4;
        default: return 5;
    }
}

class ExprParser {
public:
    ExprParser(std::string_view s, int line, int col0) : s_(s), line_(line), col0_(col0) {}

    ExprPtr parse_all() {
        skip();
        if (i_ >= s_.size()) fail("empty expression");
        ExprPtr e = expr();
        skip();
        if (i_ < s_.size()) fail("unexpected '" + std::string(s_.substr(i_, 1)) + "'");
        return e;
    }

private:
    std::string_view s_;
    size_t i_ = 0;
    int line_, col0_;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col0_ + int(i_), msg); }

    void skip() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
    }

    // '+', '-', '*', '/', '^', '(', ')' or U+2212 reported as '-'
    char peek() {
        skip();
        if (i_ >= s_.size()) return '\0';
        if (is_unicode_minus(s_, i_)) return '-';
        return s_[i_];
    }

    void advance_op() {
        if (is_unicode_minus(s_, i_))
            i_ += 3;
        else
            ++i_;
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            char c = peek();
            if (c == '+') {
                advance_op();
                e = add(e, term());
            } else if (c == '-') {
                advance_op();
                e = sub(e, term());
            } else {
                return e;
            }
        }
    }

    ExprPtr term() {
        ExprPtr e = unary();
        for (;;) {
            char c = peek();
            if (c == '*') {
                advance_op();
                e = mul(e, unary());
            } else if (c == '/') {
                advance_op();
                e = div(e, unary());
            } else {
                return e;
            }
        }
    }

    ExprPtr unary() {
        char c = peek();
        if (c == '-') {
            advance_op();
            return neg(unary());
        }
        if (c == '+') {
            advance_op();
            return unary();
        }
        return power();
    }

    ExprPtr power() {
        bool literal = false;
        ExprPtr base = primary(&literal);
        // implicit product after a numeric literal: 3π/4, 2(x+1)
        skip();
        if (literal && i_ < s_.size() && (s_[i_] == '(' || ident_start(s_, i_))) return mul(base, power());
        if (peek() == '^') {
            advance_op();
            base = pow(base, unary());
        }
        return base;
    }

    ExprPtr primary(bool* literal) {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of expression");
        char c = s_[i_];
        if (c == '(') {
            ++i_;
            ExprPtr e = expr();
            if (peek() != ')') fail("expected ')'");
            ++i_;
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number(literal);
        if (ident_start(s_, i_)) {
            size_t end = ident_end(s_, i_);
            std::string name(s_.substr(i_, end - i_));
            i_ = end;
            return var(name);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    ExprPtr number(bool* literal) {
        size_t start = i_;
        while (i_ < s_.size() && ((s_[i_] >= '0' && s_[i_] <= '9') || s_[i_] == '.')) ++i_;
        // exponent only when followed by digits, so "2e" is not swallowed
        if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
            size_t j = i_ + 1;
            if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) ++j;
            if (j < s_.size() && s_[j] >= '0' && s_[j] <= '9') {
                i_ = j;
                while (i_ < s_.size() && s_[i_] >= '0' && s_[i_] <= '9') ++i_;
            }
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + i_, v);
        if (ec != std::errc() || p != s_.data() + i_) {
            i_ = start;
            fail("malformed number");
        }
        if (literal) *literal = true;
        Expr e;
        e.kind = Expr::Kind::Num;
        e.value = v;
        return make(std::move(e));
    }
};

void render(const ExprPtr& e, std::string& out);

void render_child(const ExprPtr& c, bool parens, std::string& out) {
    if (parens) out += '(';
    render(c, out);
    if (parens) out += ')';
}

void render(const ExprPtr& e, std::string& out) {
    using K = Expr::Kind;
    switch (e->kind) {
        case K::Num: out += format_number(e->value); return;
        case K::Var: out += e->name; return;
        case K::Neg:
            out += '-';
            render_child(e->lhs, precedence(e->lhs->kind) < precedence(K::Neg), out);
            return;
        case K::Pow: {
            render_child(e->lhs, precedence(e->lhs->kind) <= precedence(K::Pow), out);
            out += '^';
            bool atom = e->rhs->kind == K::Num || e->rhs->kind == K::Var;
            render_child(e->rhs, !atom, out);
            return;
        }
        default: {
            int p = precedence(e->kind);
            render_child(e->lhs, precedence(e->lhs->kind) < p, out);
            out += e->kind == K::Add ? '+' : e->kind == K::Sub ? '-' : e->kind == K::Mul ? '*' : '/';
            render_child(e->rhs, precedence(e->rhs->kind) <= p, out);
            return;
        }
    }
}

}  // namespace

bool ident_start(std::string_view s, size_t i) {
    if (i >= s.size()) return false;
    unsigned char c = (unsigned char)s[i];
    if (c >= 0x80) return !is_unicode_minus(s, i);
    return std::isalpha(c) || c == '_';
}

size_t ident_end(std::string_view s, size_t i) {
    while (i < s.size()) {
        unsigned char c = (unsigned char)s[i];
        if (c >= 0x80) {
            if (is_unicode_minus(s, i)) break;
            ++i;
        } else if (std::isalnum(c) || c == '_') {
            ++i;
        } else {
            break;
        }
    }
    return i;
}

ExprPtr num(double v) {
    if (std::signbit(v) && v != 0.0) return neg(num(-v));
    Expr e;
    e.kind = Expr::Kind::Num;
    e.value = v == 0.0 ? 0.0 : v;
    return make(std::move(e));
}

ExprPtr var(std::string name) {
    Expr e;
    e.kind = Expr::Kind::Var;
    e.name = std::move(name);
    return make(std::move(e));
}

ExprPtr neg(ExprPtr a) {
    Expr e;
    e.kind = Expr::Kind::Neg;
    e.lhs = std::move(a);
    return make(std::move(e));
}

ExprPtr binary(Expr::Kind k, ExprPtr a, ExprPtr b) {
    Expr e;
    e.kind = k;
    e.lhs = std::move(a);
    e.rhs = std::move(b);
    return make(std::move(e));
}

ExprPtr add(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Add, std::move(a), std::move(b)); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Sub, std::move(a), std::move(b)); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Mul, std::move(a), std::move(b)); }
ExprPtr div(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Div, std::move(a), std::move(b)); }
ExprPtr pow(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Pow, std::move(a), std::move(b)); }

ExprPtr parse_expr(std::string_view text, int line, int col0) { return ExprParser(text, line, col0).parse_all(); }

std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

std::string to_string(const ExprPtr& e) {
    std::string out;
    render(e, out);
    return out;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Kind::Num: return a->value == b->value;
        case Expr::Kind::Var: return a->name == b->name && a->reg == b->reg;
        case Expr::Kind::Neg: return equal(a->lhs, b->lhs);
        default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    }
}

double evaluate(const ExprPtr& e, const std::vector<signed char>& regs) {
    using K = Expr::Kind;
    switch (e->kind) {
        case K::Num: return e->value;
        case K::Var: {
            if (e->reg < 0 || e->reg >= int(regs.size()))
                throw std::runtime_error("unresolved name '" + e->name + "'");
            signed char v = regs[e->reg];
            if (v < 0) throw std::runtime_error("register '" + e->name + "' read before write");
            return double(v);
        }
        case K::Neg: return -evaluate(e->lhs, regs);
        case K::Add: return evaluate(e->lhs, regs) + evaluate(e->rhs, regs);
        case K::Sub: return evaluate(e->lhs, regs) - evaluate(e->rhs, regs);
        case K::Mul: return evaluate(e->lhs, regs) * evaluate(e->rhs, regs);
        case K::Div: return evaluate(e->lhs, regs) / evaluate(e->rhs, regs);
        case K::Pow: return std::pow(evaluate(e->lhs, regs), evaluate(e->rhs, regs));
    }
    return 0.0;
}

bool is_constant(const ExprPtr& e) {
    switch (e->kind) {
        case Expr::Kind::Num: return true;
        case Expr::Kind::Var: return false;
        case Expr::Kind::Neg: return is_constant(e->lhs);
        default: return is_constant(e->lhs) && is_constant(e->rhs);
    }
}

}  // namespace sdq
