#pragma once

// Symbolic expression trees in the variables x and t with named parameters.
// Immutable nodes behind shared_ptr; Expr is a cheap value handle and is
// safe to share across threads.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nls {

using Params = std::map<std::string, double>;

enum class Var { X, T };

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

// Builtin function set. sn/cn/dn take (argument, modulus); the rest are unary.
enum class Builtin {
  Exp,
  Log,
  Sqrt,
  Sin,
  Cos,
  Tan,
  Sinh,
  Cosh,
  Tanh,
  Sech,
  Sn,
  Cn,
  Dn,
};

int builtin_arity(Builtin f);
const char* builtin_name(Builtin f);
std::optional<Builtin> builtin_from_name(std::string_view name);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

enum class NodeKind { Constant, VarX, VarT, Param, Neg, Binary, Call };

struct ExprNode {
  NodeKind kind{};
  double value = 0.0;     // Constant
  std::string name;       // Param
  BinaryOp bop{};         // Binary
  Builtin fn{};           // Call
  std::vector<ExprPtr> args;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}
  Expr(double v) : Expr(constant(v)) {}  // implicit: numeric literals in algebra
  explicit Expr(ExprPtr node) : node_(std::move(node)) {}

  static Expr constant(double v);
  static Expr x();
  static Expr t();
  static Expr param(std::string name);
  static Expr call(Builtin fn, std::vector<Expr> args);

  const ExprNode& node() const { return *node_; }
  const ExprPtr& ptr() const { return node_; }

  bool is_constant() const { return node_->kind == NodeKind::Constant; }
  // Constant value if this node is a literal constant.
  std::optional<double> constant_value() const;

  bool depends_on(Var v) const;

  double eval(double x, double t, const Params& params = {}) const;

  // Exact symbolic derivative, simplified. order in [1,4].
  Expr diff(Var v, int order = 1) const;

  // Constant folding, 0/1 identities, flattening of sums/products.
  Expr simplified() const;

  std::string str() const;

 private:
  ExprPtr node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);

// Parses the expression grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' factor)?
//   base   := number | 'x' | 't' | ident | ident '(' expr (',' expr)* ')'
//           | '(' expr ')' | '-' base
// '^' is right-associative; unary minus binds tighter than '^''s base.
Expr parse_expr(std::string_view source);

// Compiled postfix form for fast repeated evaluation with bound parameters.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const Params& params);
  double eval(double x, double t) const;

 private:
  struct Ins {
    int op;
    double imm;
  };
  std::vector<Ins> code_;
  int max_stack_ = 0;
};

}  // namespace nls
