#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdq {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow };
    Kind kind = Kind::Num;
    double value = 0.0;  // Num
    std::string name;    // Var
    int reg = -1;        // Var bound to a register slot after expansion
    ExprPtr lhs, rhs;    // Neg uses lhs only
};

ExprPtr num(double v);  // negative values come back as Neg(Num)
ExprPtr var(std::string name);
ExprPtr neg(ExprPtr a);
ExprPtr binary(Expr::Kind k, ExprPtr a, ExprPtr b);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr pow(ExprPtr a, ExprPtr b);

// Parses the whole of `text`. `line` and `col0` only decorate error positions.
ExprPtr parse_expr(std::string_view text, int line = 1, int col0 = 1);

// Space-free rendering that parses back to the same tree.
std::string to_string(const ExprPtr& e);
std::string format_number(double v);

bool equal(const ExprPtr& a, const ExprPtr& b);

// Register values indexed by Expr::reg; -1 means unwritten.
double evaluate(const ExprPtr& e, const std::vector<signed char>& regs);

bool is_constant(const ExprPtr& e);

// UTF-8 aware identifier scanning shared with the line parser.
bool ident_start(std::string_view s, size_t i);
size_t ident_end(std::string_view s, size_t i);

}  // namespace sdq
