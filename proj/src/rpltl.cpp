#include "issy/rpltl.hpp"

#include "issy/spec.hpp"

namespace issy {

namespace lt {

namespace {
RpltlPtr node(LtlOp op, std::vector<RpltlPtr> kids) {
  auto r = std::make_shared<Rpltl>();
  r->op = op;
  r->kids = std::move(kids);
  return r;
}
}  // namespace

RpltlPtr atom(TermPtr t) {
  auto r = std::make_shared<Rpltl>();
  r->op = LtlOp::Atom;
  r->atom = std::move(t);
  return r;
}

RpltlPtr truth() { return atom(tm::truth()); }
RpltlPtr falsity() { return atom(tm::falsity()); }

RpltlPtr neg(RpltlPtr a) { return node(LtlOp::Not, {std::move(a)}); }
RpltlPtr conj(std::vector<RpltlPtr> ks) {
  if (ks.empty()) return truth();
  if (ks.size() == 1) return ks[0];
  return node(LtlOp::And, std::move(ks));
}
RpltlPtr disj(std::vector<RpltlPtr> ks) {
  if (ks.empty()) return falsity();
  if (ks.size() == 1) return ks[0];
  return node(LtlOp::Or, std::move(ks));
}
RpltlPtr implies(RpltlPtr a, RpltlPtr b) {
  return node(LtlOp::Implies, {std::move(a), std::move(b)});
}
RpltlPtr iff(RpltlPtr a, RpltlPtr b) {
  return node(LtlOp::Iff, {std::move(a), std::move(b)});
}
RpltlPtr next(RpltlPtr a) { return node(LtlOp::Next, {std::move(a)}); }
RpltlPtr eventually(RpltlPtr a) {
  return node(LtlOp::Eventually, {std::move(a)});
}
RpltlPtr globally(RpltlPtr a) { return node(LtlOp::Globally, {std::move(a)}); }
RpltlPtr until(RpltlPtr a, RpltlPtr b) {
  return node(LtlOp::Until, {std::move(a), std::move(b)});
}
RpltlPtr weak_until(RpltlPtr a, RpltlPtr b) {
  return node(LtlOp::WeakUntil, {std::move(a), std::move(b)});
}
RpltlPtr release(RpltlPtr a, RpltlPtr b) {
  return node(LtlOp::Release, {std::move(a), std::move(b)});
}

}  // namespace lt

bool rpltl_equal(const RpltlPtr& a, const RpltlPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b || a->op != b->op) return false;
  if (a->op == LtlOp::Atom) return structural_equal(a->atom, b->atom);
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!rpltl_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

const char* to_string(WinCond w) {
  switch (w) {
    case WinCond::Safety: return "Safety";
    case WinCond::Reachability: return "Reachability";
    case WinCond::Buechi: return "Buechi";
    case WinCond::CoBuechi: return "CoBuechi";
    case WinCond::ParityMaxOdd: return "ParityMaxOdd";
  }
  return "?";
}

}  // namespace issy
