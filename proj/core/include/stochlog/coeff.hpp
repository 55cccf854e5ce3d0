#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stochlog {

enum class NodeKind : std::uint8_t {
    Constant,
    Time,
    Pi,
    // unary
    Neg,
    Sin,
    Cos,
    Sqrt,
    Exp,
    Abs,
    // binary
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

int arity(NodeKind kind) noexcept;

/// One node of an expression in postfix order. `value` is meaningful for constants only.
struct ExprNode {
    NodeKind kind;
    double value = 0.0;

    friend bool operator==(const ExprNode&, const ExprNode&) = default;
};

/// Immutable time-dependent coefficient f(t).
///
/// Nodes are stored in postfix order, so evaluation is a single pass with a
/// small value stack and structural equality is sequence equality. Copies are
/// cheap enough for coefficient-sized trees and safe to share across threads.
class CoeffExpr {
public:
    /// The zero constant.
    CoeffExpr();

    static CoeffExpr constant(double value);
    static CoeffExpr time();
    static CoeffExpr pi();
    static CoeffExpr unary(NodeKind op, const CoeffExpr& child);
    static CoeffExpr binary(NodeKind op, const CoeffExpr& lhs, const CoeffExpr& rhs);

    /// Evaluates at `t`. Throws EvalError on a negative radicand, a zero
    /// divisor or a non-finite result.
    double operator()(double t) const;

    const std::vector<ExprNode>& nodes() const noexcept { return nodes_; }
    const ExprNode& root() const { return nodes_.back(); }

    /// Children of the root, valid only when the root has that arity.
    CoeffExpr child(int index) const;

    /// True when the expression does not reference t.
    bool is_time_invariant() const noexcept;

    /// Fully parenthesised text that parses back to the same tree.
    std::string to_string() const;

    friend bool operator==(const CoeffExpr&, const CoeffExpr&) = default;

private:
    explicit CoeffExpr(std::vector<ExprNode> nodes);
    void compute_depth();

    std::vector<ExprNode> nodes_;
    std::size_t max_depth_ = 1;
};

CoeffExpr operator+(const CoeffExpr& lhs, const CoeffExpr& rhs);
CoeffExpr operator-(const CoeffExpr& lhs, const CoeffExpr& rhs);
CoeffExpr operator*(const CoeffExpr& lhs, const CoeffExpr& rhs);
CoeffExpr operator/(const CoeffExpr& lhs, const CoeffExpr& rhs);
CoeffExpr operator-(const CoeffExpr& operand);

/// Parses the coefficient grammar:
///
///     expr   := term (("+"|"-") term)*
///     term   := unary (("*"|"/") unary)*
///     unary  := "-" unary | power
///     power  := atom ("^" unary)?
///     atom   := NUMBER | "t" | "pi" | FUNC "(" expr ")" | "(" expr ")"
///     FUNC   := "sin" | "cos" | "sqrt" | "exp" | "abs"
///
/// `^` binds tighter than unary minus and is right-associative; everything
/// else is left-associative. Throws ParseError with a 0-based offset.
CoeffExpr parse_expr(std::string_view text);

inline double eval(const CoeffExpr& expr, double t) { return expr(t); }

struct QuadratureParams {
    /// Target Simpson panel width; the panel count is rounded up to even.
    double step = 1e-3;

    void validate() const;

    friend bool operator==(const QuadratureParams&, const QuadratureParams&) = default;
};

/// Composite Simpson approximation of the integral of `expr` over [t, t + width].
double window_integral(const CoeffExpr& expr, double t, double width, const QuadratureParams& q = {});

/// (1/horizon) times the integral of `expr` over [0, horizon].
double long_run_average(const CoeffExpr& expr, double horizon, const QuadratureParams& q = {});

/// max |expr(t)| over t_start, t_start + step, ..., and t_end itself.
double sup_abs_on_grid(const CoeffExpr& expr, double t_start, double t_end, double step);

struct ValidationGrid {
    double t_start = 0.0;
    double t_end = 100.0;
    double step = 0.01;

    friend bool operator==(const ValidationGrid&, const ValidationGrid&) = default;
};

/// Coefficient triple of dx = x[(r(t) - a(t) x) dt + sigma(t) dB].
struct SystemSpec {
    CoeffExpr r;
    CoeffExpr a;
    CoeffExpr sigma;
    ValidationGrid validation_grid;
    std::string label;

    /// Checks finiteness of all three coefficients and nonnegativity of a and
    /// sigma on the validation grid. Throws ValidationError naming the
    /// coefficient and the offending t.
    void validate() const;

    /// r(t) - sigma(t)^2 / 2, the mean log-growth rate.
    CoeffExpr log_growth_rate() const;

    friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Builds and validates a spec from expression text.
SystemSpec make_system(std::string_view r, std::string_view a, std::string_view sigma,
                       std::string label = {}, ValidationGrid grid = {});

}  // namespace stochlog
