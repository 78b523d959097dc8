#pragma once

#include <string>
#include <vector>

#include "rgames/streams.hpp"

namespace rgames {

enum class Sym : std::uint8_t { Pass = 0, Erase = 1, Bt = 2 };

/// One move of player II. Games constrain which variants are legal input:
/// digit games use Nat, pass games add Pass, the eraser adds Erase, the
/// backtrack game adds Bt, the multitape game uses Row exclusively.
struct Move {
  enum class Kind : std::uint8_t { Nat = 0, Symbol = 1, Row = 2 };

  Kind kind = Kind::Nat;
  Digit nat = 0;        // Nat payload; Row digit payload when !inner_pass
  Sym sym = Sym::Pass;  // Symbol payload
  std::uint64_t row = 0;
  bool inner_pass = false;

  static Move nat_move(Digit d) {
    Move m;
    m.kind = Kind::Nat;
    m.nat = d;
    return m;
  }
  static Move pass() { return sym_move(Sym::Pass); }
  static Move erase() { return sym_move(Sym::Erase); }
  static Move bt() { return sym_move(Sym::Bt); }
  static Move sym_move(Sym s) {
    Move m;
    m.kind = Kind::Symbol;
    m.sym = s;
    return m;
  }
  static Move row_move_pass(std::uint64_t r) {
    Move m;
    m.kind = Kind::Row;
    m.row = r;
    m.inner_pass = true;
    return m;
  }
  static Move row_move_nat(std::uint64_t r, Digit d) {
    Move m;
    m.kind = Kind::Row;
    m.row = r;
    m.nat = d;
    return m;
  }

  bool is_nat() const { return kind == Kind::Nat; }
  bool is_sym(Sym s) const { return kind == Kind::Symbol && sym == s; }
  bool is_pass() const { return is_sym(Sym::Pass); }
  bool is_erase() const { return is_sym(Sym::Erase); }
  bool is_bt() const { return is_sym(Sym::Bt); }
  bool is_row() const { return kind == Kind::Row; }

  friend bool operator==(const Move& a, const Move& b) { return a.key() == b.key(); }
  friend bool operator!=(const Move& a, const Move& b) { return !(a == b); }
  friend bool operator<(const Move& a, const Move& b) { return a.key() < b.key(); }

 private:
  // Factories zero unused payload fields, so the flat tuple is a sound key.
  std::tuple<int, Digit, int, std::uint64_t, bool> key() const {
    return {static_cast<int>(kind), nat, static_cast<int>(sym), row, inner_pass};
  }
};

std::string to_string(const Move& m);

using MoveSeq = std::vector<Move>;

}  // namespace rgames
