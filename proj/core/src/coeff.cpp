#include "stochlog/coeff.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "compensated_sum.hpp"
#include "stochlog/error.hpp"
#include "stochlog/format.hpp"

namespace stochlog {

int arity(NodeKind kind) noexcept {
    switch (kind) {
        case NodeKind::Constant:
        case NodeKind::Time:
        case NodeKind::Pi:
            return 0;
        case NodeKind::Neg:
        case NodeKind::Sin:
        case NodeKind::Cos:
        case NodeKind::Sqrt:
        case NodeKind::Exp:
        case NodeKind::Abs:
            return 1;
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Pow:
            return 2;
    }
    return 0;
}

namespace {

bool is_unary(NodeKind k) { return arity(k) == 1; }
bool is_binary(NodeKind k) { return arity(k) == 2; }

// Index of the first node of the subtree whose root is at `end`.
std::size_t subtree_start(const std::vector<ExprNode>& nodes, std::size_t end) {
    int need = 1;
    std::size_t pos = end;
    while (true) {
        need += arity(nodes[pos].kind) - 1;
        if (need == 0) return pos;
        --pos;
    }
}

const char* function_name(NodeKind k) {
    switch (k) {
        case NodeKind::Sin: return "sin";
        case NodeKind::Cos: return "cos";
        case NodeKind::Sqrt: return "sqrt";
        case NodeKind::Exp: return "exp";
        case NodeKind::Abs: return "abs";
        default: return "";
    }
}

const char* operator_symbol(NodeKind k) {
    switch (k) {
        case NodeKind::Add: return " + ";
        case NodeKind::Sub: return " - ";
        case NodeKind::Mul: return " * ";
        case NodeKind::Div: return " / ";
        case NodeKind::Pow: return " ^ ";
        default: return "";
    }
}

}  // namespace

std::string EvalError::format_time(double t) { return format_double(t); }

CoeffExpr::CoeffExpr() : nodes_{ExprNode{NodeKind::Constant, 0.0}} {}

CoeffExpr::CoeffExpr(std::vector<ExprNode> nodes) : nodes_(std::move(nodes)) { compute_depth(); }

void CoeffExpr::compute_depth() {
    std::size_t depth = 0;
    max_depth_ = 1;
    for (const auto& n : nodes_) {
        depth = depth + 1 - static_cast<std::size_t>(arity(n.kind));
        max_depth_ = std::max(max_depth_, depth);
    }
}

CoeffExpr CoeffExpr::constant(double value) {
    if (!std::isfinite(value)) throw ValidationError("constant must be finite");
    return CoeffExpr({ExprNode{NodeKind::Constant, value}});
}

CoeffExpr CoeffExpr::time() { return CoeffExpr({ExprNode{NodeKind::Time}}); }

CoeffExpr CoeffExpr::pi() { return CoeffExpr({ExprNode{NodeKind::Pi}}); }

CoeffExpr CoeffExpr::unary(NodeKind op, const CoeffExpr& child) {
    if (!is_unary(op)) throw ValidationError("not a unary operator");
    std::vector<ExprNode> nodes = child.nodes_;
    nodes.push_back(ExprNode{op});
    return CoeffExpr(std::move(nodes));
}

CoeffExpr CoeffExpr::binary(NodeKind op, const CoeffExpr& lhs, const CoeffExpr& rhs) {
    if (!is_binary(op)) throw ValidationError("not a binary operator");
    std::vector<ExprNode> nodes;
    nodes.reserve(lhs.nodes_.size() + rhs.nodes_.size() + 1);
    nodes.insert(nodes.end(), lhs.nodes_.begin(), lhs.nodes_.end());
    nodes.insert(nodes.end(), rhs.nodes_.begin(), rhs.nodes_.end());
    nodes.push_back(ExprNode{op});
    return CoeffExpr(std::move(nodes));
}

CoeffExpr CoeffExpr::child(int index) const {
    const int n = arity(root().kind);
    if (index < 0 || index >= n) throw ValidationError("child index out of range");
    const std::size_t last = nodes_.size() - 1;
    const std::size_t rhs_start = subtree_start(nodes_, last - 1);
    if (n == 1 || index == 1) {
        return CoeffExpr(std::vector<ExprNode>(nodes_.begin() + static_cast<std::ptrdiff_t>(rhs_start),
                                               nodes_.begin() + static_cast<std::ptrdiff_t>(last)));
    }
    return CoeffExpr(std::vector<ExprNode>(nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(rhs_start)));
}

bool CoeffExpr::is_time_invariant() const noexcept {
    return std::none_of(nodes_.begin(), nodes_.end(), [](const ExprNode& n) { return n.kind == NodeKind::Time; });
}

double CoeffExpr::operator()(double t) const {
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }

    std::size_t sp = 0;
    for (const ExprNode& node : nodes_) {
        switch (node.kind) {
            case NodeKind::Constant: stack[sp++] = node.value; break;
            case NodeKind::Time: stack[sp++] = t; break;
            case NodeKind::Pi: stack[sp++] = std::numbers::pi; break;
            case NodeKind::Neg: stack[sp - 1] = -stack[sp - 1]; break;
            case NodeKind::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case NodeKind::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case NodeKind::Sqrt:
                if (stack[sp - 1] < 0.0) throw EvalError("sqrt of negative value", t);
                stack[sp - 1] = std::sqrt(stack[sp - 1]);
                break;
            case NodeKind::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
            case NodeKind::Abs: stack[sp - 1] = std::abs(stack[sp - 1]); break;
            case NodeKind::Add: --sp; stack[sp - 1] += stack[sp]; break;
            case NodeKind::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case NodeKind::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case NodeKind::Div:
                --sp;
                if (stack[sp] == 0.0) throw EvalError("division by zero", t);
                stack[sp - 1] /= stack[sp];
                break;
            case NodeKind::Pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
        }
    }
    const double value = stack[0];
    if (!std::isfinite(value)) throw EvalError("non-finite value", t);
    return value;
}

std::string CoeffExpr::to_string() const {
    std::vector<std::string> stack;
    for (const ExprNode& node : nodes_) {
        switch (node.kind) {
            case NodeKind::Constant: {
                std::string s = format_double(node.value);
                stack.push_back(node.value < 0 ? "(" + s + ")" : s);
                break;
            }
            case NodeKind::Time: stack.emplace_back("t"); break;
            case NodeKind::Pi: stack.emplace_back("pi"); break;
            case NodeKind::Neg: stack.back() = "(-" + stack.back() + ")"; break;
            case NodeKind::Sin:
            case NodeKind::Cos:
            case NodeKind::Sqrt:
            case NodeKind::Exp:
            case NodeKind::Abs:
                stack.back() = std::string(function_name(node.kind)) + "(" + stack.back() + ")";
                break;
            default: {
                std::string rhs = std::move(stack.back());
                stack.pop_back();
                stack.back() = "(" + stack.back() + operator_symbol(node.kind) + rhs + ")";
                break;
            }
        }
    }
    return stack.back();
}

CoeffExpr operator+(const CoeffExpr& lhs, const CoeffExpr& rhs) { return CoeffExpr::binary(NodeKind::Add, lhs, rhs); }
CoeffExpr operator-(const CoeffExpr& lhs, const CoeffExpr& rhs) { return CoeffExpr::binary(NodeKind::Sub, lhs, rhs); }
CoeffExpr operator*(const CoeffExpr& lhs, const CoeffExpr& rhs) { return CoeffExpr::binary(NodeKind::Mul, lhs, rhs); }
CoeffExpr operator/(const CoeffExpr& lhs, const CoeffExpr& rhs) { return CoeffExpr::binary(NodeKind::Div, lhs, rhs); }
CoeffExpr operator-(const CoeffExpr& operand) { return CoeffExpr::unary(NodeKind::Neg, operand); }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    CoeffExpr parse() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
        CoeffExpr e = expr();
        skip_space();
        if (pos_ != text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    CoeffExpr expr() {
        CoeffExpr lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = lhs + term();
            } else if (accept('-')) {
                lhs = lhs - term();
            } else {
                return lhs;
            }
        }
    }

    CoeffExpr term() {
        CoeffExpr lhs = unary();
        while (true) {
            if (accept('*')) {
                lhs = lhs * unary();
            } else if (accept('/')) {
                lhs = lhs / unary();
            } else {
                return lhs;
            }
        }
    }

    CoeffExpr unary() {
        if (accept('-')) return -unary();
        return power();
    }

    CoeffExpr power() {
        CoeffExpr base = atom();
        if (accept('^')) return CoeffExpr::binary(NodeKind::Pow, base, unary());
        return base;
    }

    CoeffExpr atom() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (c == '(') {
            ++pos_;
            CoeffExpr inner = expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    CoeffExpr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t from = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            return pos_ - from;
        };
        std::size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) throw ParseError("malformed number", start);
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError("malformed exponent", pos_);
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc{} || ptr != text_.data() + pos_ || !std::isfinite(value)) {
            throw ParseError("number out of range", start);
        }
        return CoeffExpr::constant(value);
    }

    CoeffExpr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "t") return CoeffExpr::time();
        if (name == "pi") return CoeffExpr::pi();

        NodeKind fn;
        if (name == "sin") fn = NodeKind::Sin;
        else if (name == "cos") fn = NodeKind::Cos;
        else if (name == "sqrt") fn = NodeKind::Sqrt;
        else if (name == "exp") fn = NodeKind::Exp;
        else if (name == "abs") fn = NodeKind::Abs;
        else throw ParseError("unknown identifier '" + std::string(name) + "'", start);

        if (!accept('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ')') {
            throw ParseError(std::string(name) + " takes exactly one argument, got 0", pos_);
        }
        CoeffExpr arg = expr();
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ',') {
            throw ParseError(std::string(name) + " takes exactly one argument", pos_);
        }
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return CoeffExpr::unary(fn, arg);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

CoeffExpr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Quadrature

void QuadratureParams::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("quadrature step must be > 0");
}

double window_integral(const CoeffExpr& expr, double t, double width, const QuadratureParams& q) {
    using detail::CompensatedSum;
    q.validate();
    if (!(width > 0.0) || !std::isfinite(width)) throw ValidationError("window width must be > 0");
    if (!std::isfinite(t)) throw ValidationError("window start must be finite");

    auto panels = static_cast<std::int64_t>(std::ceil(width / q.step));
    panels = std::max<std::int64_t>(panels, 2);
    if (panels % 2 != 0) ++panels;
    const double h = width / static_cast<double>(panels);

    CompensatedSum odd;
    CompensatedSum even;
    for (std::int64_t i = 1; i < panels; ++i) {
        const double fi = expr(t + static_cast<double>(i) * h);
        if (i % 2 != 0) {
            odd.add(fi);
        } else {
            even.add(fi);
        }
    }
    const double ends = expr(t) + expr(t + width);
    return h / 3.0 * (ends + 4.0 * odd.value() + 2.0 * even.value());
}

double long_run_average(const CoeffExpr& expr, double horizon, const QuadratureParams& q) {
    if (!(horizon > 0.0)) throw ValidationError("horizon must be > 0");
    return window_integral(expr, 0.0, horizon, q) / horizon;
}

double sup_abs_on_grid(const CoeffExpr& expr, double t_start, double t_end, double step) {
    if (!(t_start < t_end)) throw ValidationError("grid requires t_start < t_end");
    if (!(step > 0.0)) throw ValidationError("grid step must be > 0");
    double best = 0.0;
    const auto n = static_cast<std::int64_t>(std::floor((t_end - t_start) / step));
    for (std::int64_t i = 0; i <= n; ++i) {
        best = std::max(best, std::abs(expr(t_start + static_cast<double>(i) * step)));
    }
    return std::max(best, std::abs(expr(t_end)));
}

// ---------------------------------------------------------------------------
// SystemSpec

void SystemSpec::validate() const {
    const ValidationGrid& g = validation_grid;
    if (!(g.t_start < g.t_end) || !(g.step > 0.0)) {
        throw ValidationError("validation grid requires t_start < t_end and step > 0");
    }
    auto check = [](const CoeffExpr& e, const char* name, bool nonnegative, double t) {
        double v;
        try {
            v = e(t);
        } catch (const EvalError& err) {
            throw ValidationError(std::string(name) + "(t): " + err.what());
        }
        if (nonnegative && v < 0.0) {
            throw ValidationError(std::string(name) + "(t) negative at t=" + format_double(t));
        }
    };
    const auto n = static_cast<std::int64_t>(std::floor((g.t_end - g.t_start) / g.step));
    for (std::int64_t i = 0; i <= n + 1; ++i) {
        const double t = i <= n ? g.t_start + static_cast<double>(i) * g.step : g.t_end;
        check(r, "r", false, t);
        check(a, "a", true, t);
        check(sigma, "sigma", true, t);
    }
}

CoeffExpr SystemSpec::log_growth_rate() const {
    return r - sigma * sigma / CoeffExpr::constant(2.0);
}

SystemSpec make_system(std::string_view r, std::string_view a, std::string_view sigma, std::string label,
                       ValidationGrid grid) {
    SystemSpec spec{parse_expr(r), parse_expr(a), parse_expr(sigma), grid, std::move(label)};
    spec.validate();
    return spec;
}

}  // namespace stochlog
