// Tiny games used across the solver and extraction tests.
#pragma once

#include "issy/game.hpp"

namespace issy::test {

// One location, one self-loop with guard true. Safety, trivially realizable.
inline SymbolicGame g_loop() {
  SymbolicGame g;
  g.env.declare("x", VarKind::State, Sort::Int);
  g.objective = WinCond::Safety;
  g.locations.push_back({"a", 1, tm::truth()});
  g.transitions.push_back({0, 0, tm::truth()});
  g.initial = 0;
  return g;
}

// The only move enters an absorbing color-0 sink: unrealizable safety.
inline SymbolicGame g_trap() {
  SymbolicGame g;
  g.env.declare("x", VarKind::State, Sort::Int);
  g.objective = WinCond::Safety;
  g.locations.push_back({"a", 1, tm::truth()});
  g.locations.push_back({"err", 0, tm::truth()});
  g.transitions.push_back(
      {0, 1, tm::eq(tm::var("x", true), tm::var("x"))});
  g.transitions.push_back(
      {1, 1, tm::eq(tm::var("x", true), tm::var("x"))});
  g.initial = 0;
  return g;
}

// Reachability: from a the system may drift x by the input (a->a with
// x' = x + i) or jump to the target b when x >= 3.
inline SymbolicGame g_in() {
  SymbolicGame g;
  g.env.declare("i", VarKind::Input, Sort::Int);
  g.env.declare("x", VarKind::State, Sort::Int);
  g.objective = WinCond::Reachability;
  g.locations.push_back({"a", 0, tm::truth()});
  g.locations.push_back({"b", 1, tm::truth()});
  g.transitions.push_back(
      {0, 0, tm::eq(tm::var("x", true),
                    tm::add({tm::var("x"), tm::var("i")}))});
  g.transitions.push_back({0, 1, tm::ge(tm::var("x"), tm::constant(int64_t{3}))});
  g.transitions.push_back({1, 1, tm::eq(tm::var("x", true), tm::var("x"))});
  g.initial = 0;
  return g;
}

// Decrement game over unbounded Int: a->a decrements x, a->b opens at
// x <= 0. Realizable everywhere, but only via acceleration.
inline SymbolicGame g_dec() {
  SymbolicGame g;
  g.env.declare("x", VarKind::State, Sort::Int);
  g.objective = WinCond::Reachability;
  g.locations.push_back({"a", 0, tm::truth()});
  g.locations.push_back({"b", 1, tm::truth()});
  g.transitions.push_back(
      {0, 0, tm::eq(tm::var("x", true),
                    tm::sub(tm::var("x"), tm::constant(int64_t{1})))});
  g.transitions.push_back(
      {0, 1, tm::conj({tm::le(tm::var("x"), tm::constant(int64_t{0})),
                       tm::eq(tm::var("x", true), tm::var("x"))})});
  g.transitions.push_back({1, 1, tm::eq(tm::var("x", true), tm::var("x"))});
  g.initial = 0;
  return g;
}

}  // namespace issy::test
