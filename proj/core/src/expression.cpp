#include "pqlab/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "pqlab/errors.hpp"

namespace pqlab {

namespace {

enum class Op {
  kConst, kX1, kX2,
  kNeg, kAdd, kSub, kMul, kDiv, kPow,
  kAbs, kSqrt, kExp, kLog, kSin, kCos, kAtan2, kMax, kMin,
  kDistCorner, kDistQuadrant,
};

double dist_quadrant(const Point& x, double cx, double cy, double sx, double sy) {
  // distance along each axis to the half-plane, then Euclidean combination
  const double dx = std::max(0.0, -sx * (x[0] - cx));
  const double dy = std::max(0.0, -sy * (x[1] - cy));
  return std::hypot(dx, dy);
}

}  // namespace

struct Expression::Node {
  Op op = Op::kConst;
  double value = 0.0;
  std::vector<std::shared_ptr<const Node>> kids;

  double eval(const Point& x) const {
    auto k = [&](std::size_t i) { return kids[i]->eval(x); };
    switch (op) {
      case Op::kConst: return value;
      case Op::kX1: return x[0];
      case Op::kX2: return x[1];
      case Op::kNeg: return -k(0);
      case Op::kAdd: return k(0) + k(1);
      case Op::kSub: return k(0) - k(1);
      case Op::kMul: return k(0) * k(1);
      case Op::kDiv: return k(0) / k(1);
      case Op::kPow: return std::pow(k(0), k(1));
      case Op::kAbs: return std::abs(k(0));
      case Op::kSqrt: return std::sqrt(k(0));
      case Op::kExp: return std::exp(k(0));
      case Op::kLog: return std::log(k(0));
      case Op::kSin: return std::sin(k(0));
      case Op::kCos: return std::cos(k(0));
      case Op::kAtan2: return std::atan2(k(0), k(1));
      case Op::kMax: {
        double r = k(0);
        for (std::size_t i = 1; i < kids.size(); ++i) r = std::max(r, k(i));
        return r;
      }
      case Op::kMin: {
        double r = k(0);
        for (std::size_t i = 1; i < kids.size(); ++i) r = std::min(r, k(i));
        return r;
      }
      case Op::kDistCorner: return std::hypot(x[0] - k(0), x[1] - k(1));
      case Op::kDistQuadrant: return dist_quadrant(x, k(0), k(1), k(2), k(3));
    }
    return 0.0;
  }

  bool constant() const {
    if (op == Op::kX1 || op == Op::kX2 || op == Op::kDistCorner || op == Op::kDistQuadrant) {
      return false;
    }
    return std::all_of(kids.begin(), kids.end(), [](const auto& c) { return c->constant(); });
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, std::vector<NodePtr> kids = {}, double value = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->value = value;
  n->kids = std::move(kids);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("expression '" + std::string(s_) + "': " + what + " at offset " +
                          std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::kAdd, {lhs, term()});
      } else if (accept('-')) {
        lhs = make(Op::kSub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::kMul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Op::kDiv, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::kNeg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::kPow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return named();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return make(Op::kConst, {}, v);
  }

  NodePtr named() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(s_.substr(start, pos_ - start));
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      expect(')');
      return call(name, std::move(args));
    }
    if (name == "x1" || name == "x") return make(Op::kX1);
    if (name == "x2" || name == "y") return make(Op::kX2);
    if (name == "pi") return make(Op::kConst, {}, std::numbers::pi);
    fail("unknown name '" + name + "'");
  }

  NodePtr call(const std::string& name, std::vector<NodePtr> args) {
    struct Fn {
      const char* name;
      Op op;
      int min_args;
      int max_args;
    };
    static constexpr Fn kFns[] = {
        {"abs", Op::kAbs, 1, 1},        {"sqrt", Op::kSqrt, 1, 1},
        {"exp", Op::kExp, 1, 1},        {"log", Op::kLog, 1, 1},
        {"sin", Op::kSin, 1, 1},        {"cos", Op::kCos, 1, 1},
        {"atan2", Op::kAtan2, 2, 2},
        {"max", Op::kMax, 2, 16},       {"min", Op::kMin, 2, 16},
        {"dist_corner", Op::kDistCorner, 2, 2},
        {"dist_quadrant", Op::kDistQuadrant, 4, 4},
    };
    for (const Fn& f : kFns) {
      if (name != f.name) continue;
      const int n = static_cast<int>(args.size());
      if (n < f.min_args || n > f.max_args) fail("wrong number of arguments to " + name);
      return make(f.op, std::move(args));
    }
    fail("unknown function '" + name + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Expression::Expression() : root_(make(Op::kConst, {}, 0.0)), text_("0") {}

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = trim(text);
  if (e.text_.empty()) throw InvalidArgument("empty expression");
  e.root_ = Parser(e.text_).parse();
  return e;
}

Expression Expression::constant(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("non-finite constant expression");
  Expression e;
  e.root_ = make(Op::kConst, {}, value);
  e.text_ = format_double(value);
  return e;
}

double Expression::operator()(const Point& x) const { return root_->eval(x); }

bool Expression::is_constant() const { return root_->constant(); }

}  // namespace pqlab
