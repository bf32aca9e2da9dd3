#pragma once

#include <memory>
#include <vector>

#include "issy/terms.hpp"

namespace issy {

// RP-LTL: LTL whose atoms are quantifier-free first-order terms over inputs,
// states, and primed states.
enum class LtlOp {
  Atom,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Next,
  Eventually,
  Globally,
  Until,
  WeakUntil,
  Release,
};

struct Rpltl;
using RpltlPtr = std::shared_ptr<const Rpltl>;

struct Rpltl {
  LtlOp op = LtlOp::Atom;
  TermPtr atom;                 // Atom only
  std::vector<RpltlPtr> kids;   // operator arity: Not/X/F/G 1, U/W/R/->/<-> 2,
                                // And/Or n-ary
};

namespace lt {
RpltlPtr atom(TermPtr t);
RpltlPtr truth();
RpltlPtr falsity();
RpltlPtr neg(RpltlPtr a);
RpltlPtr conj(std::vector<RpltlPtr> ks);
RpltlPtr disj(std::vector<RpltlPtr> ks);
RpltlPtr implies(RpltlPtr a, RpltlPtr b);
RpltlPtr iff(RpltlPtr a, RpltlPtr b);
RpltlPtr next(RpltlPtr a);
RpltlPtr eventually(RpltlPtr a);
RpltlPtr globally(RpltlPtr a);
RpltlPtr until(RpltlPtr a, RpltlPtr b);
RpltlPtr weak_until(RpltlPtr a, RpltlPtr b);
RpltlPtr release(RpltlPtr a, RpltlPtr b);
}  // namespace lt

bool rpltl_equal(const RpltlPtr& a, const RpltlPtr& b);

}  // namespace issy
