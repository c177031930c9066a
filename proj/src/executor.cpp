#include "gasp/executor.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <set>
#include <string_view>

namespace gasp {

bool values_equal(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number())
        return a.get<double>() == b.get<double>();
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!values_equal(a[i], b[i])) return false;
        return true;
    }
    return a == b;
}

namespace {

using Clock = std::chrono::steady_clock;

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TimeoutSignal {};

struct Node {
    enum class Kind { number, symbol, list } kind = Kind::number;
    double number = 0.0;
    std::string symbol;
    std::vector<Node> children;
};

struct Parser {
    std::string_view src;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    Node parse() {
        skip_ws();
        Node n = parse_expr();
        skip_ws();
        if (pos != src.size()) throw EvalError("trailing characters after expression");
        return n;
    }

    Node parse_expr() {
        skip_ws();
        if (pos >= src.size()) throw EvalError("unexpected end of program");
        const char c = src[pos];
        if (c == '(') {
            ++pos;
            Node n;
            n.kind = Node::Kind::list;
            for (;;) {
                skip_ws();
                if (pos >= src.size()) throw EvalError("unterminated list");
                if (src[pos] == ')') {
                    ++pos;
                    break;
                }
                n.children.push_back(parse_expr());
            }
            if (n.children.empty()) throw EvalError("empty application");
            return n;
        }
        if (c == ')') throw EvalError("unexpected ')'");
        std::size_t start = pos;
        while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
               src[pos] != '(' && src[pos] != ')')
            ++pos;
        std::string tok(src.substr(start, pos - start));
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() + tok.size() && !tok.empty() &&
            (std::isdigit(static_cast<unsigned char>(tok[0])) ||
             ((tok[0] == '-' || tok[0] == '+' || tok[0] == '.') && tok.size() > 1))) {
            Node n;
            n.kind = Node::Kind::number;
            n.number = v;
            return n;
        }
        Node n;
        n.kind = Node::Kind::symbol;
        n.symbol = std::move(tok);
        return n;
    }
};

Value number_value(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) <= 9007199254740992.0)
        return Value(static_cast<std::int64_t>(v));
    return Value(v);
}

struct EvalContext {
    const Value* input;
    std::uint64_t steps = 0;
    std::uint64_t max_steps;
    Clock::time_point deadline;
    std::uint64_t run_id;

    void tick() {
        if (++steps >= max_steps) throw TimeoutSignal{};
        if ((steps & 0x3ff) == 0 && Clock::now() >= deadline) throw TimeoutSignal{};
    }
};

double as_number(const Value& v, const char* op) {
    if (!v.is_number()) throw EvalError(std::string(op) + ": expected a number");
    return v.get<double>();
}

const Value& as_list(const Value& v, const char* op) {
    if (!v.is_array()) throw EvalError(std::string(op) + ": expected a list");
    return v;
}

Value eval(const Node& n, EvalContext& ctx);

Value eval_op(const std::string& op, const std::vector<Node>& args, EvalContext& ctx) {
    auto arg = [&](std::size_t i) { return eval(args[i + 1], ctx); };
    const std::size_t argc = args.size() - 1;
    auto need = [&](std::size_t n) {
        if (argc != n) throw EvalError(op + ": wrong arity");
    };
    auto fold = [&](double init, auto f) {
        double acc = argc > 0 ? as_number(arg(0), op.c_str()) : init;
        for (std::size_t i = 1; i < argc; ++i) acc = f(acc, as_number(arg(i), op.c_str()));
        return acc;
    };

    if (op == "+") return number_value(fold(0.0, [](double a, double b) { return a + b; }));
    if (op == "*") return number_value(fold(1.0, [](double a, double b) { return a * b; }));
    if (op == "-") {
        need(2);
        return number_value(as_number(arg(0), "-") - as_number(arg(1), "-"));
    }
    if (op == "/") {
        need(2);
        const double d = as_number(arg(1), "/");
        if (d == 0.0) throw EvalError("/: division by zero");
        return number_value(as_number(arg(0), "/") / d);
    }
    if (op == "%") {
        need(2);
        const double d = as_number(arg(1), "%");
        if (d == 0.0) throw EvalError("%: modulo by zero");
        return number_value(std::fmod(as_number(arg(0), "%"), d));
    }
    if (op == "neg") {
        need(1);
        return number_value(-as_number(arg(0), "neg"));
    }
    if (op == "abs") {
        need(1);
        return number_value(std::abs(as_number(arg(0), "abs")));
    }
    if (op == "min") return number_value(fold(0.0, [](double a, double b) { return std::min(a, b); }));
    if (op == "max") return number_value(fold(0.0, [](double a, double b) { return std::max(a, b); }));
    if (op == "<" || op == "<=" || op == ">" || op == ">=" || op == "=" || op == "!=") {
        need(2);
        const double a = as_number(arg(0), op.c_str());
        const double b = as_number(arg(1), op.c_str());
        bool r = false;
        if (op == "<") r = a < b;
        else if (op == "<=") r = a <= b;
        else if (op == ">") r = a > b;
        else if (op == ">=") r = a >= b;
        else if (op == "=") r = a == b;
        else r = a != b;
        return number_value(r ? 1.0 : 0.0);
    }
    if (op == "if") {
        need(3);
        const double c = as_number(arg(0), "if");
        return eval(args[c != 0.0 ? 2 : 3], ctx);
    }
    if (op == "len") {
        need(1);
        const Value v = arg(0);
        if (v.is_string()) return number_value(static_cast<double>(v.get<std::string>().size()));
        return number_value(static_cast<double>(as_list(v, "len").size()));
    }
    if (op == "sum" || op == "prod") {
        need(1);
        const Value v = arg(0);
        double acc = op == "sum" ? 0.0 : 1.0;
        for (const Value& e : as_list(v, op.c_str())) {
            if (op == "sum") acc += as_number(e, op.c_str());
            else acc *= as_number(e, op.c_str());
        }
        return number_value(acc);
    }
    if (op == "head") {
        need(1);
        const Value v = arg(0);
        const Value& l = as_list(v, "head");
        if (l.empty()) throw EvalError("head: empty list");
        return l[0];
    }
    if (op == "tail") {
        need(1);
        const Value v = arg(0);
        const Value& l = as_list(v, "tail");
        if (l.empty()) throw EvalError("tail: empty list");
        Value out = Value::array();
        for (std::size_t i = 1; i < l.size(); ++i) out.push_back(l[i]);
        return out;
    }
    if (op == "reverse") {
        need(1);
        const Value v = arg(0);
        const Value& l = as_list(v, "reverse");
        Value out = Value::array();
        for (std::size_t i = l.size(); i > 0; --i) out.push_back(l[i - 1]);
        return out;
    }
    if (op == "sortl") {
        need(1);
        Value v = arg(0);
        as_list(v, "sortl");
        std::vector<double> nums;
        nums.reserve(v.size());
        for (const Value& e : v) nums.push_back(as_number(e, "sortl"));
        std::sort(nums.begin(), nums.end());
        Value out = Value::array();
        for (double d : nums) out.push_back(number_value(d));
        return out;
    }
    if (op == "concat") {
        need(2);
        const Value a = arg(0);
        const Value b = arg(1);
        as_list(a, "concat");
        as_list(b, "concat");
        Value out = a;
        for (const Value& e : b) out.push_back(e);
        return out;
    }
    if (op == "nth") {
        need(2);
        const Value v = arg(0);
        const Value& l = as_list(v, "nth");
        const double ix = as_number(arg(1), "nth");
        if (ix < 0 || ix >= static_cast<double>(l.size()))
            throw EvalError("nth: index out of range");
        return l[static_cast<std::size_t>(ix)];
    }
    if (op == "range") {
        need(1);
        const double n = as_number(arg(0), "range");
        if (n < 0 || n > 1e6) throw EvalError("range: bad length");
        Value out = Value::array();
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
            out.push_back(Value(i));
        return out;
    }
    if (op == "repeat") {
        need(2);
        const double n = as_number(arg(0), "repeat");
        Value last = number_value(0.0);
        for (double i = 0; i < n; ++i) {
            ctx.tick();
            last = eval(args[2], ctx);
        }
        return last;
    }
    if (op == "clock") {
        need(0);
        return number_value(static_cast<double>(ctx.run_id));
    }
    if (op == "rand") {
        need(0);
        std::uint64_t h = ctx.run_id * 0x9e3779b97f4a7c15ull + ctx.steps;
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 33;
        return number_value(static_cast<double>(h % 999983ull));
    }
    throw EvalError("unknown operation: " + op);
}

Value eval(const Node& n, EvalContext& ctx) {
    ctx.tick();
    switch (n.kind) {
        case Node::Kind::number:
            return number_value(n.number);
        case Node::Kind::symbol:
            if (n.symbol == "x") return *ctx.input;
            throw EvalError("unbound symbol: " + n.symbol);
        case Node::Kind::list: {
            const Node& head = n.children[0];
            if (head.kind != Node::Kind::symbol)
                throw EvalError("application head must be an operation");
            return eval_op(head.symbol, n.children, ctx);
        }
    }
    throw EvalError("unreachable");
}

void collect_ops(const Node& n, std::set<std::string>& out) {
    if (n.kind != Node::Kind::list) return;
    if (n.children[0].kind == Node::Kind::symbol) out.insert(n.children[0].symbol);
    for (const Node& c : n.children) collect_ops(c, out);
}

}  // namespace

ExecResult ExprExecutor::run(const ExecRequest& req) {
    const std::uint64_t run_id = run_counter_.fetch_add(1) + 1;
    Node root;
    try {
        Parser p{req.program};
        root = p.parse();
    } catch (const EvalError& e) {
        return {ExecStatus::error, {}, std::string("parse: ") + e.what()};
    }
    EvalContext ctx{&req.input, 0, opts_.max_steps,
                    Clock::now() + std::chrono::milliseconds(req.timeout_ms), run_id};
    try {
        Value out = eval(root, ctx);
        return {ExecStatus::ok, std::move(out), {}};
    } catch (const TimeoutSignal&) {
        return {ExecStatus::timeout, {}, "execution budget exceeded"};
    } catch (const EvalError& e) {
        return {ExecStatus::error, {}, e.what()};
    }
}

OpScan scan_program_ops(const std::string& program) {
    OpScan scan;
    try {
        Parser p{program};
        Node root = p.parse();
        std::set<std::string> ops;
        collect_ops(root, ops);
        scan.parsed = true;
        scan.ops.assign(ops.begin(), ops.end());
    } catch (const EvalError&) {
        scan.parsed = false;
    }
    return scan;
}

}  // namespace gasp
