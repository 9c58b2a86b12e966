#include "geogasket/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "geogasket/errors.hpp"

namespace geogasket {

struct Expression::Node {
    enum class Kind { Number, VarU, VarV, Neg, Add, Sub, Mul, Div, Pow, Call };
    enum class Fn { Exp, Log, Sin, Cos, Tan, Sinh, Cosh, Tanh, Sqrt, Pow };

    Kind kind = Kind::Number;
    Fn fn = Fn::Exp;
    double value = 0.0;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(double u, double v) const {
        switch (kind) {
            case Kind::Number: return value;
            case Kind::VarU: return u;
            case Kind::VarV: return v;
            case Kind::Neg: return -args[0]->eval(u, v);
            case Kind::Add: return args[0]->eval(u, v) + args[1]->eval(u, v);
            case Kind::Sub: return args[0]->eval(u, v) - args[1]->eval(u, v);
            case Kind::Mul: return args[0]->eval(u, v) * args[1]->eval(u, v);
            case Kind::Div: return args[0]->eval(u, v) / args[1]->eval(u, v);
            case Kind::Pow: return std::pow(args[0]->eval(u, v), args[1]->eval(u, v));
            case Kind::Call: break;
        }
        const double a = args[0]->eval(u, v);
        switch (fn) {
            case Fn::Exp: return std::exp(a);
            case Fn::Log: return std::log(a);
            case Fn::Sin: return std::sin(a);
            case Fn::Cos: return std::cos(a);
            case Fn::Tan: return std::tan(a);
            case Fn::Sinh: return std::sinh(a);
            case Fn::Cosh: return std::cosh(a);
            case Fn::Tanh: return std::tanh(a);
            case Fn::Sqrt: return std::sqrt(a);
            case Fn::Pow: return std::pow(a, args[1]->eval(u, v));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_all() {
        skip_space();
        auto root = parse_sum();
        skip_space();
        if (pos_ < src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
        return root;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                col = 1;
            } else if ((static_cast<unsigned char>(src_[i]) & 0xC0) != 0x80) {
                ++col;
            }
        }
        throw ParseError(msg, line, col);
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    // Accepts an ASCII operator or its typographic UTF-8 spelling.
    bool accept(char ascii, std::string_view utf8 = {}) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == ascii) {
            ++pos_;
            return true;
        }
        if (!utf8.empty() && src_.substr(pos_, utf8.size()) == utf8) {
            pos_ += utf8.size();
            return true;
        }
        return false;
    }

    static NodePtr make(Node::Kind k, std::vector<NodePtr> args) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->args = std::move(args);
        return n;
    }

    NodePtr parse_sum() {
        auto lhs = parse_product();
        while (true) {
            if (accept('+')) {
                lhs = make(Node::Kind::Add, {lhs, parse_product()});
            } else if (accept('-', "−")) {
                lhs = make(Node::Kind::Sub, {lhs, parse_product()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        while (true) {
            if (accept('*', "×")) {
                lhs = make(Node::Kind::Mul, {lhs, parse_unary()});
            } else if (accept('/', "÷")) {
                lhs = make(Node::Kind::Div, {lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-', "−")) return make(Node::Kind::Neg, {parse_unary()});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        if (accept('^')) return make(Node::Kind::Pow, {base, parse_unary()});
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        if (accept('(')) {
            auto inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        const std::string tail(src_.substr(pos_));
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(tail, &used);
        } catch (const std::exception&) {
            fail_at("malformed number", start);
        }
        pos_ += used;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Number;
        n->value = value;
        return n;
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name(src_.substr(start, pos_ - start));

        skip_space();
        const bool is_call = pos_ < src_.size() && src_[pos_] == '(';
        if (!is_call) {
            auto n = std::make_shared<Node>();
            if (name == "u") {
                n->kind = Node::Kind::VarU;
            } else if (name == "v") {
                n->kind = Node::Kind::VarV;
            } else if (name == "pi") {
                n->value = std::numbers::pi;
            } else if (name == "e") {
                n->value = std::numbers::e;
            } else {
                fail_at("unknown identifier '" + name + "'", start);
            }
            return n;
        }

        static const std::pair<const char*, Node::Fn> table[] = {
            {"exp", Node::Fn::Exp},   {"log", Node::Fn::Log},   {"sin", Node::Fn::Sin},
            {"cos", Node::Fn::Cos},   {"tan", Node::Fn::Tan},   {"sinh", Node::Fn::Sinh},
            {"cosh", Node::Fn::Cosh}, {"tanh", Node::Fn::Tanh}, {"sqrt", Node::Fn::Sqrt},
            {"pow", Node::Fn::Pow},
        };
        const Node::Fn* fn = nullptr;
        for (const auto& [key, f] : table)
            if (name == key) fn = &f;
        if (fn == nullptr) fail_at("unknown function '" + name + "'", start);

        accept('(');
        std::vector<NodePtr> args{parse_sum()};
        while (accept(',')) args.push_back(parse_sum());
        if (!accept(')')) fail("expected ')' after arguments of '" + name + "'");
        const std::size_t arity = (*fn == Node::Fn::Pow) ? 2 : 1;
        if (args.size() != arity) {
            fail_at("function '" + name + "' takes " + std::to_string(arity) + " argument(s)", start);
        }
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->fn = *fn;
        n->args = std::move(args);
        return n;
    }
};

}  // namespace

Expression Expression::parse(std::string_view source) {
    Expression e;
    e.source_ = std::string(source);
    e.root_ = Parser(e.source_).parse_all();
    return e;
}

double Expression::operator()(double u, double v) const { return root_->eval(u, v); }

}  // namespace geogasket
