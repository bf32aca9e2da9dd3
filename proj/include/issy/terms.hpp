#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "issy/rational.hpp"

namespace issy {

enum class Sort { Bool, Int, Real };

std::string to_string(Sort s);

enum class VarKind { Input, State };

// Declared variables of a specification. State variables implicitly have a
// primed twin of the same sort; inputs never do.
class VarEnv {
 public:
  struct Entry {
    std::string name;
    VarKind kind;
    Sort sort;
  };

  void declare(const std::string& name, VarKind kind, Sort sort);
  const Entry* lookup(const std::string& name) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry> inputs() const;
  std::vector<Entry> states() const;
  bool operator==(const VarEnv& o) const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
};

enum class Op {
  And,
  Or,
  Not,
  Implies,
  Ite,
  Distinct,
  Eq,
  Lt,
  Gt,
  Le,
  Ge,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Abs,
  ToReal,
};

const char* op_name(Op op);  // SMT-LIB / LLissy spelling

enum class Quantifier { Forall, Exists };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable first-order term tree. Quantifiers are an internal extension for
// the solver layers; they never reach the interchange format.
struct Term {
  enum class Kind { Const, BoolConst, Var, App, Quant };

  Kind kind;

  // Const
  Rational value;
  // BoolConst
  bool bval = false;
  // Var
  std::string var;
  bool primed = false;
  // App
  Op op = Op::And;
  std::vector<TermPtr> args;
  // Quant
  Quantifier quant = Quantifier::Exists;
  std::vector<std::pair<std::string, Sort>> bound;
  TermPtr body;

  bool is_true() const { return kind == Kind::BoolConst && bval; }
  bool is_false() const { return kind == Kind::BoolConst && !bval; }
  bool is_const() const { return kind == Kind::Const; }
  bool is_var() const { return kind == Kind::Var; }
  bool is_app(Op o) const { return kind == Kind::App && op == o; }
};

// Construction helpers. n-ary and/or builders do not simplify; use
// normalize() for that.
namespace tm {
TermPtr constant(const Rational& r);
TermPtr constant(int64_t n);
TermPtr boolean(bool b);
TermPtr truth();
TermPtr falsity();
TermPtr var(const std::string& name, bool primed = false);
TermPtr app(Op op, std::vector<TermPtr> args);
TermPtr conj(std::vector<TermPtr> args);  // and() == true
TermPtr disj(std::vector<TermPtr> args);  // or() == false
TermPtr neg(TermPtr a);
TermPtr implies(TermPtr a, TermPtr b);
TermPtr ite(TermPtr c, TermPtr a, TermPtr b);
TermPtr eq(TermPtr a, TermPtr b);
TermPtr le(TermPtr a, TermPtr b);
TermPtr lt(TermPtr a, TermPtr b);
TermPtr ge(TermPtr a, TermPtr b);
TermPtr gt(TermPtr a, TermPtr b);
TermPtr add(std::vector<TermPtr> args);
TermPtr sub(TermPtr a, TermPtr b);
TermPtr minus(TermPtr a);
TermPtr mul(std::vector<TermPtr> args);
TermPtr forall(std::vector<std::pair<std::string, Sort>> bound, TermPtr body);
TermPtr exists(std::vector<std::pair<std::string, Sort>> bound, TermPtr body);
}  // namespace tm

bool structural_equal(const TermPtr& a, const TermPtr& b);
size_t term_hash(const TermPtr& t);
size_t term_size(const TermPtr& t);  // node count
std::string term_to_string(const TermPtr& t);  // debug/test rendering (LLissy-style)

// --- typing -----------------------------------------------------------------

struct SortError : std::runtime_error {
  SortError(std::string where, std::string detail)
      : std::runtime_error("sort error at " + where + ": " + detail) {}
};
struct UnknownVariable : std::runtime_error {
  explicit UnknownVariable(const std::string& name)
      : std::runtime_error("unknown variable: " + name), name(name) {}
  std::string name;
};
struct PrimedInput : std::runtime_error {
  explicit PrimedInput(const std::string& name)
      : std::runtime_error("input variable cannot be primed: " + name),
        name(name) {}
  std::string name;
};

// Sort of a term under env. Numerals are Int/Real polymorphic and default to
// Int in ambiguous positions; Int numerals are accepted in Real positions.
Sort typecheck(const TermPtr& t, const VarEnv& env);

// --- structure --------------------------------------------------------------

struct VarRef {
  std::string name;
  bool primed;
  auto operator<=>(const VarRef&) const = default;
};

std::vector<VarRef> free_vars(const TermPtr& t);
bool mentions_primed(const TermPtr& t);
bool mentions_input(const TermPtr& t, const VarEnv& env);
bool mentions_var(const TermPtr& t, const VarRef& v);
bool has_quantifier(const TermPtr& t);

// Capture-free simultaneous substitution of free variable references.
TermPtr substitute(const TermPtr& t, const std::map<VarRef, TermPtr>& mapping);

enum class PrimeDirection { PrimeAll, UnprimeAll };

// Toggle priming on every state-variable reference; inputs untouched.
TermPtr apply_priming(const TermPtr& t, PrimeDirection dir, const VarEnv& env);

// Semantics-preserving cleanup: constant folding, and/or flattening, unit
// absorption, double-negation removal, bound subsumption on common linear
// atoms.
TermPtr normalize(const TermPtr& t);

// --- evaluation -------------------------------------------------------------

struct Value {
  Sort sort;
  bool b = false;
  Rational r;

  static Value of_bool(bool v) { return {Sort::Bool, v, Rational()}; }
  static Value of_int(const Rational& v) { return {Sort::Int, false, v}; }
  static Value of_real(const Rational& v) { return {Sort::Real, false, v}; }
  bool operator==(const Value& o) const {
    if (sort == Sort::Bool) return o.sort == Sort::Bool && b == o.b;
    return o.sort != Sort::Bool && r == o.r;
  }
};

using Valuation = std::map<VarRef, Value>;

// Evaluates a quantifier-free term under a total valuation of its free
// variables. Throws std::runtime_error on missing variables or quantifiers.
Value eval_term(const TermPtr& t, const Valuation& v);

// --- SMT-LIB2 serialization ---------------------------------------------------

constexpr const char* kSmtPrimeSuffix = "__p";

std::string serialize_smt2(const TermPtr& t);
std::string smt2_var_name(const std::string& name, bool primed);

}  // namespace issy
