#include "issy/smtlib.hpp"

#include <map>
#include <vector>

namespace issy::smtlib {

std::optional<Sort> parse_sort(const SExpr& e) {
  if (!e.is_atom) return std::nullopt;
  if (e.atom == "Bool") return Sort::Bool;
  if (e.atom == "Int") return Sort::Int;
  if (e.atom == "Real") return Sort::Real;
  return std::nullopt;
}

namespace {

std::optional<Op> parse_op(const std::string& s) {
  static const std::map<std::string, Op> ops = {
      {"and", Op::And},     {"or", Op::Or},
      {"not", Op::Not},     {"=>", Op::Implies},
      {"ite", Op::Ite},     {"distinct", Op::Distinct},
      {"=", Op::Eq},        {"<", Op::Lt},
      {">", Op::Gt},        {"<=", Op::Le},
      {">=", Op::Ge},       {"+", Op::Add},
      {"-", Op::Sub},       {"*", Op::Mul},
      {"/", Op::Div},       {"mod", Op::Mod},
      {"abs", Op::Abs},     {"to_real", Op::ToReal},
  };
  auto it = ops.find(s);
  return it == ops.end() ? std::nullopt : std::optional<Op>(it->second);
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

bool numeral_like(const std::string& s) {
  if (s.empty()) return false;
  size_t i = 0;
  bool dot = false, digit = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '.') {
      if (dot) return false;
      dot = true;
    } else if (s[i] >= '0' && s[i] <= '9') {
      digit = true;
    } else {
      return false;
    }
  }
  return digit;
}

struct P {
  const std::function<std::optional<Sort>(const std::string&)>& lookup;
  std::vector<std::map<std::string, TermPtr>> lets;
  std::vector<std::map<std::string, Sort>> binders;

  std::optional<Sort> bound_sort(const std::string& n) const {
    for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
      auto jt = it->find(n);
      if (jt != it->end()) return jt->second;
    }
    return std::nullopt;
  }

  TermPtr walk(const SExpr& e) {
    if (e.is_atom) return atom(e.atom);
    if (e.items.empty()) throw ParseError("empty application");
    const SExpr& head = e.items[0];
    if (!head.is_atom) throw ParseError("non-atomic operator");
    const std::string& h = head.atom;
    if (h == "let") {
      if (e.size() != 3 || !e[1].is_list())
        throw ParseError("malformed let");
      std::map<std::string, TermPtr> frame;
      for (const auto& b : e[1].items) {
        if (!b.is_list() || b.size() != 2 || !b[0].is_atom)
          throw ParseError("malformed let binding");
        frame[b[0].atom] = walk(b[1]);  // parallel let: old scope
      }
      lets.push_back(std::move(frame));
      TermPtr body = walk(e[2]);
      lets.pop_back();
      return body;
    }
    if (h == "forall" || h == "exists") {
      if (e.size() != 3 || !e[1].is_list())
        throw ParseError("malformed quantifier");
      std::vector<std::pair<std::string, Sort>> bound;
      std::map<std::string, Sort> frame;
      for (const auto& b : e[1].items) {
        if (!b.is_list() || b.size() != 2 || !b[0].is_atom)
          throw ParseError("malformed binder");
        auto s = parse_sort(b[1]);
        if (!s) throw ParseError("unknown sort " + b[1].to_string());
        bound.push_back({b[0].atom, *s});
        frame[b[0].atom] = *s;
      }
      binders.push_back(std::move(frame));
      TermPtr body = walk(e[2]);
      binders.pop_back();
      return h == "forall" ? tm::forall(std::move(bound), std::move(body))
                           : tm::exists(std::move(bound), std::move(body));
    }
    auto op = parse_op(h);
    if (!op) throw ParseError("unknown operator " + h);
    std::vector<TermPtr> args;
    args.reserve(e.size() - 1);
    for (size_t i = 1; i < e.size(); ++i) args.push_back(walk(e[i]));
    // (- 5) on a constant is just a negative numeral.
    if (*op == Op::Sub && args.size() == 1 && args[0]->is_const())
      return tm::constant(-args[0]->value);
    // (/ p q) on constants is a rational literal.
    if (*op == Op::Div && args.size() == 2 && args[0]->is_const() &&
        args[1]->is_const() && !args[1]->value.is_zero())
      return tm::constant(args[0]->value / args[1]->value);
    return tm::app(*op, std::move(args));
  }

  TermPtr atom(const std::string& a) {
    if (a == "true") return tm::truth();
    if (a == "false") return tm::falsity();
    if (all_digits(a)) return tm::constant(Rational(std::stoll(a)));
    if (numeral_like(a)) return tm::constant(Rational::parse_decimal(a));
    for (auto it = lets.rbegin(); it != lets.rend(); ++it) {
      auto jt = it->find(a);
      if (jt != it->end()) return jt->second;
    }
    if (bound_sort(a)) return tm::var(a);
    if (lookup(a)) return tm::var(a);
    throw ParseError("undeclared symbol " + a);
  }
};

}  // namespace

TermPtr parse_term(
    const SExpr& e,
    const std::function<std::optional<Sort>(const std::string&)>& lookup) {
  P p{lookup, {}, {}};
  return p.walk(e);
}

}  // namespace issy::smtlib
