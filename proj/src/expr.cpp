#include "nls/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "nls/elliptic.hpp"

namespace nls {

namespace {

struct BuiltinInfo {
  Builtin fn;
  const char* name;
  int arity;
};

constexpr std::array<BuiltinInfo, 13> kBuiltins{{
    {Builtin::Exp, "exp", 1},
    {Builtin::Log, "log", 1},
    {Builtin::Sqrt, "sqrt", 1},
    {Builtin::Sin, "sin", 1},
    {Builtin::Cos, "cos", 1},
    {Builtin::Tan, "tan", 1},
    {Builtin::Sinh, "sinh", 1},
    {Builtin::Cosh, "cosh", 1},
    {Builtin::Tanh, "tanh", 1},
    {Builtin::Sech, "sech", 1},
    {Builtin::Sn, "sn", 2},
    {Builtin::Cn, "cn", 2},
    {Builtin::Dn, "dn", 2},
}};

ExprPtr make_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

double sech(double v) {
  // 2e^{-|v|}/(1+e^{-2|v|}): no overflow for large |v|.
  const double e = std::exp(-std::fabs(v));
  return 2.0 * e / (1.0 + e * e);
}

}  // namespace

int builtin_arity(Builtin f) {
  for (const auto& b : kBuiltins)
    if (b.fn == f) return b.arity;
  return 1;
}

const char* builtin_name(Builtin f) {
  for (const auto& b : kBuiltins)
    if (b.fn == f) return b.name;
  return "?";
}

std::optional<Builtin> builtin_from_name(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (name == b.name) return b.fn;
  return std::nullopt;
}

Expr Expr::constant(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("Expr constant must be finite");
  ExprNode n;
  n.kind = NodeKind::Constant;
  n.value = v;
  return Expr(make_node(std::move(n)));
}

Expr Expr::x() {
  ExprNode n;
  n.kind = NodeKind::VarX;
  return Expr(make_node(std::move(n)));
}

Expr Expr::t() {
  ExprNode n;
  n.kind = NodeKind::VarT;
  return Expr(make_node(std::move(n)));
}

Expr Expr::param(std::string name) {
  ExprNode n;
  n.kind = NodeKind::Param;
  n.name = std::move(name);
  return Expr(make_node(std::move(n)));
}

Expr Expr::call(Builtin fn, std::vector<Expr> args) {
  if (static_cast<int>(args.size()) != builtin_arity(fn))
    throw std::invalid_argument(std::string("wrong arity for ") + builtin_name(fn));
  ExprNode n;
  n.kind = NodeKind::Call;
  n.fn = fn;
  for (auto& a : args) n.args.push_back(a.ptr());
  return Expr(make_node(std::move(n)));
}

std::optional<double> Expr::constant_value() const {
  if (node_->kind == NodeKind::Constant) return node_->value;
  return std::nullopt;
}

namespace {

Expr binary(BinaryOp op, const Expr& a, const Expr& b) {
  ExprNode n;
  n.kind = NodeKind::Binary;
  n.bop = op;
  n.args = {a.ptr(), b.ptr()};
  return Expr(make_node(std::move(n)));
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) { return binary(BinaryOp::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return binary(BinaryOp::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return binary(BinaryOp::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return binary(BinaryOp::Div, a, b); }
Expr pow(const Expr& a, const Expr& b) { return binary(BinaryOp::Pow, a, b); }

Expr operator-(const Expr& a) {
  ExprNode n;
  n.kind = NodeKind::Neg;
  n.args = {a.ptr()};
  return Expr(make_node(std::move(n)));
}

bool Expr::depends_on(Var v) const {
  const NodeKind want = (v == Var::X) ? NodeKind::VarX : NodeKind::VarT;
  // Iterative DFS; trees are small.
  std::vector<const ExprNode*> stack{node_.get()};
  while (!stack.empty()) {
    const ExprNode* n = stack.back();
    stack.pop_back();
    if (n->kind == want) return true;
    for (const auto& a : n->args) stack.push_back(a.get());
  }
  return false;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void eval_fail(const ExprNode& n, const std::string& why);

double eval_node(const ExprNode& n, double x, double t, const Params& params) {
  switch (n.kind) {
    case NodeKind::Constant:
      return n.value;
    case NodeKind::VarX:
      return x;
    case NodeKind::VarT:
      return t;
    case NodeKind::Param: {
      auto it = params.find(n.name);
      if (it == params.end()) eval_fail(n, "unbound parameter '" + n.name + "'");
      return it->second;
    }
    case NodeKind::Neg:
      return -eval_node(*n.args[0], x, t, params);
    case NodeKind::Binary: {
      const double a = eval_node(*n.args[0], x, t, params);
      const double b = eval_node(*n.args[1], x, t, params);
      double r = 0;
      switch (n.bop) {
        case BinaryOp::Add: r = a + b; break;
        case BinaryOp::Sub: r = a - b; break;
        case BinaryOp::Mul: r = a * b; break;
        case BinaryOp::Div:
          if (b == 0.0) eval_fail(n, "division by zero");
          r = a / b;
          break;
        case BinaryOp::Pow:
          r = std::pow(a, b);
          break;
      }
      if (!std::isfinite(r)) eval_fail(n, "non-finite result");
      return r;
    }
    case NodeKind::Call: {
      const double a = eval_node(*n.args[0], x, t, params);
      double r = 0;
      switch (n.fn) {
        case Builtin::Exp: r = std::exp(a); break;
        case Builtin::Log:
          if (a <= 0.0) eval_fail(n, "log of non-positive value");
          r = std::log(a);
          break;
        case Builtin::Sqrt:
          if (a < 0.0) eval_fail(n, "sqrt of negative value");
          r = std::sqrt(a);
          break;
        case Builtin::Sin: r = std::sin(a); break;
        case Builtin::Cos: r = std::cos(a); break;
        case Builtin::Tan: r = std::tan(a); break;
        case Builtin::Sinh: r = std::sinh(a); break;
        case Builtin::Cosh: r = std::cosh(a); break;
        case Builtin::Tanh: r = std::tanh(a); break;
        case Builtin::Sech: r = sech(a); break;
        case Builtin::Sn:
        case Builtin::Cn:
        case Builtin::Dn: {
          const double m = eval_node(*n.args[1], x, t, params);
          const JacobiSCD j = jacobi_scd(a, m);
          r = (n.fn == Builtin::Sn) ? j.sn : (n.fn == Builtin::Cn) ? j.cn : j.dn;
          break;
        }
      }
      if (!std::isfinite(r)) eval_fail(n, "non-finite result");
      return r;
    }
  }
  throw EvalError("corrupt expression node");
}

}  // namespace

double Expr::eval(double x, double t, const Params& params) const {
  return eval_node(*node_, x, t, params);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4, atoms 5.
int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Binary:
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
      return 1;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Constant:
      return n.value < 0 ? 3 : 5;  // negative literal prints with '-'
    default:
      return 5;
  }
}

void print_number(std::ostream& os, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

void print_node(std::ostream& os, const ExprNode& n, int min_prec) {
  const int prec = precedence(n);
  const bool parens = prec < min_prec;
  if (parens) os << '(';
  switch (n.kind) {
    case NodeKind::Constant:
      print_number(os, n.value);
      break;
    case NodeKind::VarX:
      os << 'x';
      break;
    case NodeKind::VarT:
      os << 't';
      break;
    case NodeKind::Param:
      os << n.name;
      break;
    case NodeKind::Neg:
      os << '-';
      print_node(os, *n.args[0], 4);
      break;
    case NodeKind::Binary: {
      const char* sym = "";
      int lp = prec, rp = prec + 1;
      switch (n.bop) {
        case BinaryOp::Add: sym = " + "; rp = prec; break;
        case BinaryOp::Sub: sym = " - "; break;
        case BinaryOp::Mul: sym = "*"; rp = prec; break;
        case BinaryOp::Div: sym = "/"; break;
        case BinaryOp::Pow:
          sym = "^";
          lp = prec + 1;  // left operand of '^' must bind tighter
          rp = prec;      // right-associative
          break;
      }
      print_node(os, *n.args[0], lp);
      os << sym;
      print_node(os, *n.args[1], rp);
      break;
    }
    case NodeKind::Call: {
      os << builtin_name(n.fn) << '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << ", ";
        print_node(os, *n.args[i], 0);
      }
      os << ')';
      break;
    }
  }
  if (parens) os << ')';
}

[[noreturn]] void eval_fail(const ExprNode& n, const std::string& why) {
  std::ostringstream os;
  os << "domain error: " << why << " in '";
  print_node(os, n, 0);
  os << "'";
  throw EvalError(os.str());
}

}  // namespace

std::string Expr::str() const {
  std::ostringstream os;
  print_node(os, *node_, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("syntax error at byte " + std::to_string(pos_) + ": " + msg, pos_);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Expr parse_sum() {
    Expr e = parse_term();
    for (;;) {
      if (eat('+'))
        e = e + parse_term();
      else if (eat('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      if (eat('*'))
        e = e * parse_factor();
      else if (eat('/'))
        e = e / parse_factor();
      else
        return e;
    }
  }

  Expr parse_factor() {
    Expr base = parse_base();
    if (eat('^')) return pow(base, parse_factor());  // right-associative
    return base;
  }

  Expr parse_base() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      return -parse_base();
    }
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    double v = 0;
    const char* begin = src_.data() + pos_;
    const char* end = src_.data() + src_.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return Expr::constant(v);
  }

  Expr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (peek() == '(') {
      auto fn = builtin_from_name(name);
      if (!fn) {
        pos_ = start;
        fail("unknown function name '" + name + "'");
      }
      eat('(');
      std::vector<Expr> args;
      args.push_back(parse_sum());
      while (eat(',')) args.push_back(parse_sum());
      if (!eat(')')) fail("expected ')' in call to '" + name + "'");
      if (static_cast<int>(args.size()) != builtin_arity(*fn)) {
        pos_ = start;
        fail("function '" + name + "' expects " + std::to_string(builtin_arity(*fn)) +
             " argument(s), got " + std::to_string(args.size()));
      }
      return Expr::call(*fn, std::move(args));
    }
    if (name == "x") return Expr::x();
    if (name == "t") return Expr::t();
    return Expr::param(std::move(name));
  }
};

}  // namespace

Expr parse_expr(std::string_view source) { return Parser(source).parse(); }

// ---------------------------------------------------------------------------
// Simplification: constant folding, 0/1 identities, flattening of nested
// sums and products. No factoring and no trig identities.

namespace {

bool is_const(const ExprPtr& p, double v) {
  return p->kind == NodeKind::Constant && p->value == v;
}

Expr from_ptr(const ExprPtr& p) { return Expr(p); }

ExprPtr simplify_node(const ExprPtr& p);

// Collects a +/- chain into signed terms.
void collect_sum(const ExprPtr& p, double sign, std::vector<std::pair<double, ExprPtr>>& out) {
  if (p->kind == NodeKind::Binary && p->bop == BinaryOp::Add) {
    collect_sum(p->args[0], sign, out);
    collect_sum(p->args[1], sign, out);
  } else if (p->kind == NodeKind::Binary && p->bop == BinaryOp::Sub) {
    collect_sum(p->args[0], sign, out);
    collect_sum(p->args[1], -sign, out);
  } else if (p->kind == NodeKind::Neg) {
    collect_sum(p->args[0], -sign, out);
  } else {
    out.emplace_back(sign, p);
  }
}

// Collects a */÷ chain into numerator/denominator factors, tracking sign.
void collect_product(const ExprPtr& p, bool inverted, double& sign, std::vector<ExprPtr>& num,
                     std::vector<ExprPtr>& den) {
  if (p->kind == NodeKind::Binary && p->bop == BinaryOp::Mul) {
    collect_product(p->args[0], inverted, sign, num, den);
    collect_product(p->args[1], inverted, sign, num, den);
  } else if (p->kind == NodeKind::Binary && p->bop == BinaryOp::Div) {
    collect_product(p->args[0], inverted, sign, num, den);
    collect_product(p->args[1], !inverted, sign, num, den);
  } else if (p->kind == NodeKind::Neg) {
    sign = -sign;
    collect_product(p->args[0], inverted, sign, num, den);
  } else {
    (inverted ? den : num).push_back(p);
  }
}

bool expr_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Constant: return a.value == b.value;
    case NodeKind::VarX:
    case NodeKind::VarT: return true;
    case NodeKind::Param: return a.name == b.name;
    case NodeKind::Binary:
      if (a.bop != b.bop) return false;
      break;
    case NodeKind::Call:
      if (a.fn != b.fn) return false;
      break;
    case NodeKind::Neg:
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (a.args[i] != b.args[i] && !expr_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

// Splits a term into (numeric coefficient, structural core) so that
// structurally identical cores can be collected.
std::pair<double, ExprPtr> split_coefficient(const ExprPtr& p) {
  if (p->kind == NodeKind::Binary && p->bop == BinaryOp::Mul &&
      p->args[0]->kind == NodeKind::Constant)
    return {p->args[0]->value, p->args[1]};
  return {1.0, p};
}

ExprPtr rebuild_sum(std::vector<std::pair<double, ExprPtr>>& terms) {
  double const_acc = 0;
  std::vector<std::pair<double, ExprPtr>> collected;  // coefficient, core
  for (auto& [s, e] : terms) {
    if (e->kind == NodeKind::Constant) {
      const_acc += s * e->value;
      continue;
    }
    auto [k, core] = split_coefficient(e);
    k *= s;
    bool merged = false;
    for (auto& [kc, cc] : collected)
      if (cc == core || expr_equal(*cc, *core)) {
        kc += k;
        merged = true;
        break;
      }
    if (!merged) collected.emplace_back(k, core);
  }
  Expr acc = Expr::constant(0.0);
  bool have = false;
  for (auto& [k, core] : collected) {
    if (k == 0.0) continue;
    const Expr c = from_ptr(core);
    if (!have) {
      acc = (k == 1.0) ? c : (k == -1.0) ? -c : Expr::constant(k) * c;
      have = true;
    } else if (k == 1.0) {
      acc = acc + c;
    } else if (k == -1.0) {
      acc = acc - c;
    } else if (k < 0) {
      acc = acc - Expr::constant(-k) * c;
    } else {
      acc = acc + Expr::constant(k) * c;
    }
  }
  if (const_acc != 0.0 || !have) {
    if (!have) return Expr::constant(const_acc).ptr();
    acc = (const_acc < 0) ? acc - Expr::constant(-const_acc) : acc + Expr::constant(const_acc);
  }
  return acc.ptr();
}

ExprPtr rebuild_product(double sign, std::vector<ExprPtr>& num, std::vector<ExprPtr>& den) {
  double c = sign;
  std::vector<ExprPtr> nf, df;
  for (auto& e : num) {
    if (e->kind == NodeKind::Constant)
      c *= e->value;
    else
      nf.push_back(e);
  }
  for (auto& e : den) {
    if (e->kind == NodeKind::Constant && e->value != 0.0)
      c /= e->value;
    else
      df.push_back(e);
  }
  if (c == 0.0) return Expr::constant(0.0).ptr();

  Expr naccum = Expr::constant(1.0);
  bool have = false;
  for (auto& e : nf) {
    naccum = have ? naccum * from_ptr(e) : from_ptr(e);
    have = true;
  }
  if (!have) naccum = Expr::constant(1.0);

  if (c == -1.0 && have)
    naccum = -naccum;
  else if (c != 1.0 || !have)
    naccum = have ? Expr::constant(c) * naccum : Expr::constant(c);

  if (df.empty()) return naccum.ptr();
  Expr daccum = from_ptr(df[0]);
  for (std::size_t i = 1; i < df.size(); ++i) daccum = daccum * from_ptr(df[i]);
  return (naccum / daccum).ptr();
}

ExprPtr simplify_node(const ExprPtr& p) {
  switch (p->kind) {
    case NodeKind::Constant:
    case NodeKind::VarX:
    case NodeKind::VarT:
    case NodeKind::Param:
      return p;
    case NodeKind::Neg: {
      ExprPtr a = simplify_node(p->args[0]);
      if (a->kind == NodeKind::Constant) return Expr::constant(-a->value).ptr();
      if (a->kind == NodeKind::Neg) return a->args[0];
      ExprNode n;
      n.kind = NodeKind::Neg;
      n.args = {a};
      return make_node(std::move(n));
    }
    case NodeKind::Binary: {
      ExprPtr a = simplify_node(p->args[0]);
      ExprPtr b = simplify_node(p->args[1]);
      switch (p->bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: {
          if (p->bop == BinaryOp::Sub && a.get() == b.get()) return Expr::constant(0.0).ptr();
          Expr joined = (p->bop == BinaryOp::Add) ? from_ptr(a) + from_ptr(b)
                                                  : from_ptr(a) - from_ptr(b);
          std::vector<std::pair<double, ExprPtr>> terms;
          collect_sum(joined.ptr(), 1.0, terms);
          return rebuild_sum(terms);
        }
        case BinaryOp::Mul:
        case BinaryOp::Div: {
          if (p->bop == BinaryOp::Div && is_const(b, 0.0)) break;  // keep; eval reports
          Expr joined = (p->bop == BinaryOp::Mul) ? from_ptr(a) * from_ptr(b)
                                                  : from_ptr(a) / from_ptr(b);
          double sign = 1.0;
          std::vector<ExprPtr> num, den;
          collect_product(joined.ptr(), false, sign, num, den);
          return rebuild_product(sign, num, den);
        }
        case BinaryOp::Pow: {
          if (is_const(b, 0.0)) return Expr::constant(1.0).ptr();
          if (is_const(b, 1.0)) return a;
          if (is_const(a, 1.0)) return Expr::constant(1.0).ptr();
          if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant) {
            const double r = std::pow(a->value, b->value);
            if (std::isfinite(r)) return Expr::constant(r).ptr();
          }
          return pow(from_ptr(a), from_ptr(b)).ptr();
        }
      }
      ExprNode n;
      n.kind = NodeKind::Binary;
      n.bop = p->bop;
      n.args = {a, b};
      return make_node(std::move(n));
    }
    case NodeKind::Call: {
      std::vector<ExprPtr> args;
      bool all_const = true;
      for (const auto& arg : p->args) {
        args.push_back(simplify_node(arg));
        all_const = all_const && args.back()->kind == NodeKind::Constant;
      }
      ExprNode n;
      n.kind = NodeKind::Call;
      n.fn = p->fn;
      n.args = std::move(args);
      ExprPtr folded = make_node(std::move(n));
      if (all_const) {
        try {
          const double r = eval_node(*folded, 0, 0, {});
          return Expr::constant(r).ptr();
        } catch (const EvalError&) {
          // leave unfolded; eval will report the domain error in context
        }
      }
      return folded;
    }
  }
  return p;
}

}  // namespace

Expr Expr::simplified() const { return Expr(simplify_node(node_)); }

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr diff_node(const Expr& e, Var v);

Expr diff_call(const ExprNode& n, Var v) {
  const Expr u(n.args[0]);
  const Expr du = diff_node(u, v);
  switch (n.fn) {
    case Builtin::Exp:
      return Expr::call(Builtin::Exp, {u}) * du;
    case Builtin::Log:
      return du / u;
    case Builtin::Sqrt:
      return du / (Expr::constant(2.0) * Expr::call(Builtin::Sqrt, {u}));
    case Builtin::Sin:
      return Expr::call(Builtin::Cos, {u}) * du;
    case Builtin::Cos:
      return -(Expr::call(Builtin::Sin, {u}) * du);
    case Builtin::Tan: {
      const Expr tn = Expr::call(Builtin::Tan, {u});
      return (Expr::constant(1.0) + tn * tn) * du;
    }
    case Builtin::Sinh:
      return Expr::call(Builtin::Cosh, {u}) * du;
    case Builtin::Cosh:
      return Expr::call(Builtin::Sinh, {u}) * du;
    case Builtin::Tanh: {
      const Expr th = Expr::call(Builtin::Tanh, {u});
      return (Expr::constant(1.0) - th * th) * du;
    }
    case Builtin::Sech: {
      const Expr sh = Expr::call(Builtin::Sech, {u});
      const Expr th = Expr::call(Builtin::Tanh, {u});
      return -(sh * th * du);
    }
    case Builtin::Sn:
    case Builtin::Cn:
    case Builtin::Dn: {
      const Expr m(n.args[1]);
      if (m.depends_on(v))
        throw std::invalid_argument("derivative w.r.t. the elliptic modulus is unsupported");
      const Expr snu = Expr::call(Builtin::Sn, {u, m});
      const Expr cnu = Expr::call(Builtin::Cn, {u, m});
      const Expr dnu = Expr::call(Builtin::Dn, {u, m});
      if (n.fn == Builtin::Sn) return cnu * dnu * du;
      if (n.fn == Builtin::Cn) return -(snu * dnu * du);
      return -(m * snu * cnu * du);
    }
  }
  throw std::invalid_argument("unknown builtin in diff");
}

Expr diff_node(const Expr& e, Var v) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Constant:
    case NodeKind::Param:
      return Expr::constant(0.0);
    case NodeKind::VarX:
      return Expr::constant(v == Var::X ? 1.0 : 0.0);
    case NodeKind::VarT:
      return Expr::constant(v == Var::T ? 1.0 : 0.0);
    case NodeKind::Neg:
      return -diff_node(Expr(n.args[0]), v);
    case NodeKind::Binary: {
      const Expr a(n.args[0]), b(n.args[1]);
      switch (n.bop) {
        case BinaryOp::Add:
          return diff_node(a, v) + diff_node(b, v);
        case BinaryOp::Sub:
          return diff_node(a, v) - diff_node(b, v);
        case BinaryOp::Mul:
          return diff_node(a, v) * b + a * diff_node(b, v);
        case BinaryOp::Div:
          return (diff_node(a, v) * b - a * diff_node(b, v)) / (b * b);
        case BinaryOp::Pow: {
          if (auto c = b.constant_value()) {
            // d/dv a^c = c a^(c-1) a'
            return Expr::constant(*c) * pow(a, Expr::constant(*c - 1.0)) * diff_node(a, v);
          }
          // General: a^b (b' log a + b a'/a)
          return pow(a, b) *
                 (diff_node(b, v) * Expr::call(Builtin::Log, {a}) + b * diff_node(a, v) / a);
        }
      }
      throw std::invalid_argument("unknown binary op in diff");
    }
    case NodeKind::Call:
      return diff_call(n, v);
  }
  throw std::invalid_argument("corrupt node in diff");
}

}  // namespace

Expr Expr::diff(Var v, int order) const {
  if (order < 1 || order > 4) throw std::invalid_argument("diff order must be in [1,4]");
  Expr e = *this;
  for (int i = 0; i < order; ++i) e = diff_node(e, v).simplified();
  return e;
}

// ---------------------------------------------------------------------------
// Compiled evaluation

namespace {

enum CompiledOp : int {
  kPushConst,
  kPushX,
  kPushT,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kPowInt,  // imm holds a small integer exponent
  kNeg,
  kExp,
  kLog,
  kSqrt,
  kSin,
  kCos,
  kTan,
  kSinh,
  kCosh,
  kTanh,
  kSech,
  kSn,
  kCn,
  kDn,
};

double pow_int(double base, int e) {
  bool inv = e < 0;
  unsigned n = inv ? static_cast<unsigned>(-static_cast<long long>(e)) : static_cast<unsigned>(e);
  double r = 1.0, b = base;
  while (n) {
    if (n & 1u) r *= b;
    b *= b;
    n >>= 1;
  }
  return inv ? 1.0 / r : r;
}

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, const Params& params) {
  int depth = 0;
  // Post-order emit.
  struct Frame {
    const ExprNode* node;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{&e.node(), 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_child < f.node->args.size()) {
      const ExprNode* child = f.node->args[f.next_child++].get();
      stack.push_back({child, 0});
      continue;
    }
    const ExprNode& n = *f.node;
    auto emit = [&](int op, double imm, int stack_delta) {
      code_.push_back({op, imm});
      depth += stack_delta;
      if (depth > max_stack_) max_stack_ = depth;
    };
    switch (n.kind) {
      case NodeKind::Constant:
        emit(kPushConst, n.value, 1);
        break;
      case NodeKind::VarX:
        emit(kPushX, 0, 1);
        break;
      case NodeKind::VarT:
        emit(kPushT, 0, 1);
        break;
      case NodeKind::Param: {
        auto it = params.find(n.name);
        if (it == params.end()) throw EvalError("unbound parameter '" + n.name + "'");
        emit(kPushConst, it->second, 1);
        break;
      }
      case NodeKind::Neg:
        emit(kNeg, 0, 0);
        break;
      case NodeKind::Binary: {
        int op = kAdd;
        switch (n.bop) {
          case BinaryOp::Add: op = kAdd; break;
          case BinaryOp::Sub: op = kSub; break;
          case BinaryOp::Mul: op = kMul; break;
          case BinaryOp::Div: op = kDiv; break;
          case BinaryOp::Pow: op = kPow; break;
        }
        if (op == kPow && n.args[1]->kind == NodeKind::Constant) {
          const double ev = n.args[1]->value;
          if (ev == std::floor(ev) && std::fabs(ev) <= 16.0) {
            // Drop the pushed exponent and use the integer fast path.
            code_.pop_back();
            depth -= 1;
            emit(kPowInt, ev, 0);
            break;
          }
        }
        emit(op, 0, -1);
        break;
      }
      case NodeKind::Call: {
        int op = kExp;
        int delta = 0;
        switch (n.fn) {
          case Builtin::Exp: op = kExp; break;
          case Builtin::Log: op = kLog; break;
          case Builtin::Sqrt: op = kSqrt; break;
          case Builtin::Sin: op = kSin; break;
          case Builtin::Cos: op = kCos; break;
          case Builtin::Tan: op = kTan; break;
          case Builtin::Sinh: op = kSinh; break;
          case Builtin::Cosh: op = kCosh; break;
          case Builtin::Tanh: op = kTanh; break;
          case Builtin::Sech: op = kSech; break;
          case Builtin::Sn: op = kSn; delta = -1; break;
          case Builtin::Cn: op = kCn; delta = -1; break;
          case Builtin::Dn: op = kDn; delta = -1; break;
        }
        emit(op, 0, delta);
        break;
      }
    }
    stack.pop_back();
  }
  if (max_stack_ > 256) throw EvalError("expression too deep to compile");
}

double CompiledExpr::eval(double x, double t) const {
  double stack[256];
  int sp = 0;
  const std::size_t n = code_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ins = code_[i];
    switch (ins.op) {
      case kPushConst: stack[sp++] = ins.imm; break;
      case kPushX: stack[sp++] = x; break;
      case kPushT: stack[sp++] = t; break;
      case kAdd: --sp; stack[sp - 1] += stack[sp]; break;
      case kSub: --sp; stack[sp - 1] -= stack[sp]; break;
      case kMul: --sp; stack[sp - 1] *= stack[sp]; break;
      case kDiv:
        --sp;
        if (stack[sp] == 0.0) throw EvalError("domain error: division by zero");
        stack[sp - 1] /= stack[sp];
        break;
      case kPow:
        --sp;
        stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]);
        break;
      case kPowInt:
        stack[sp - 1] = pow_int(stack[sp - 1], static_cast<int>(ins.imm));
        break;
      case kNeg: stack[sp - 1] = -stack[sp - 1]; break;
      case kExp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
      case kLog:
        if (stack[sp - 1] <= 0.0) throw EvalError("domain error: log of non-positive value");
        stack[sp - 1] = std::log(stack[sp - 1]);
        break;
      case kSqrt:
        if (stack[sp - 1] < 0.0) throw EvalError("domain error: sqrt of negative value");
        stack[sp - 1] = std::sqrt(stack[sp - 1]);
        break;
      case kSin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
      case kCos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
      case kTan: stack[sp - 1] = std::tan(stack[sp - 1]); break;
      case kSinh: stack[sp - 1] = std::sinh(stack[sp - 1]); break;
      case kCosh: stack[sp - 1] = std::cosh(stack[sp - 1]); break;
      case kTanh: stack[sp - 1] = std::tanh(stack[sp - 1]); break;
      case kSech: stack[sp - 1] = sech(stack[sp - 1]); break;
      case kSn:
      case kCn:
      case kDn: {
        --sp;
        const JacobiSCD j = jacobi_scd(stack[sp - 1], stack[sp]);
        stack[sp - 1] = (ins.op == kSn) ? j.sn : (ins.op == kCn) ? j.cn : j.dn;
        break;
      }
    }
  }
  const double r = stack[0];
  if (!std::isfinite(r)) throw EvalError("domain error: non-finite result");
  return r;
}

}  // namespace nls
