#include "rgames/game.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace rgames {
namespace {

std::optional<std::string> admit(const AlphabetSpec& a, const Move& m) {
  if (!a.admits(m)) return "move " + to_string(m) + " is outside the alphabet";
  return std::nullopt;
}

// ---- monitors ----

class LMonitor : public RuleMonitor {
 public:
  explicit LMonitor(AlphabetSpec a) : a_(a) {}

 protected:
  std::optional<std::string> do_step(Digit, const Move& ii) override { return admit(a_, ii); }
  AlphabetSpec a_;
};

class WMonitor : public LMonitor {
 public:
  using LMonitor::LMonitor;
  std::vector<std::string> pending_obligations() const override {
    return {"infinitely many digits"};
  }
};

class KLipMonitor : public RuleMonitor {
 public:
  KLipMonitor(AlphabetSpec a, std::uint64_t k) : a_(a), k_(k) {}

 protected:
  std::optional<std::string> do_step(Digit, const Move& ii) override {
    const std::uint64_t t = turn_++;
    if (auto r = admit(a_, ii)) return r;
    if (t < k_ && !ii.is_pass()) return "expected a pass before the delay bound";
    if (t >= k_ && ii.is_pass()) return "pass after the delay bound";
    return std::nullopt;
  }

 private:
  AlphabetSpec a_;
  std::uint64_t k_;
  std::uint64_t turn_ = 0;
};

class EMonitor : public LMonitor {
 public:
  using LMonitor::LMonitor;
  std::vector<std::string> pending_obligations() const override {
    return {"output length diverges"};
  }
};

class BtMonitor : public LMonitor {
 public:
  using LMonitor::LMonitor;
  std::vector<std::string> pending_obligations() const override {
    return {"finitely many backtracks", "infinitely many digits after the last backtrack"};
  }
};

class MMonitor : public LMonitor {
 public:
  using LMonitor::LMonitor;
  std::vector<std::string> pending_obligations() const override {
    return {"exactly one infinite row"};
  }
};

// ---- interpreters ----

class DigitsInterp : public Interpreter {
 public:
  explicit DigitsInterp(std::uint64_t skip = 0) : skip_(skip) {}
  void step(Digit, const Move& ii) override {
    if (turn_++ < skip_) return;
    if (ii.is_nat()) out_.push_back(ii.nat);
  }
  FinSeq tentative() const override { return out_; }
  std::uint64_t committed_len() const override { return out_.size(); }

 private:
  std::uint64_t skip_;
  std::uint64_t turn_ = 0;
  FinSeq out_;
};

class EraserInterp : public Interpreter {
 public:
  void step(Digit, const Move& ii) override {
    if (ii.is_nat())
      st_.push_back(ii.nat);
    else if (ii.is_erase() && !st_.empty())
      st_.pop_back();
  }
  FinSeq tentative() const override { return st_; }
  std::uint64_t committed_len() const override { return 0; }  // any slot may be erased later

 private:
  FinSeq st_;
};

class BtInterp : public Interpreter {
 public:
  void step(Digit, const Move& ii) override {
    if (ii.is_bt())
      out_.clear();
    else if (ii.is_nat())
      out_.push_back(ii.nat);
  }
  FinSeq tentative() const override { return out_; }
  std::uint64_t committed_len() const override { return 0; }  // a backtrack may still wipe it

 private:
  FinSeq out_;
};

class MultitapeInterp : public Interpreter {
 public:
  void step(Digit, const Move& ii) override {
    if (ii.is_row() && !ii.inner_pass) rows_[ii.row].push_back(ii.nat);
  }
  FinSeq tentative() const override {
    // Best guess: the longest row so far (lowest index on ties).
    const FinSeq* best = nullptr;
    for (const auto& [r, content] : rows_)
      if (!best || content.size() > best->size()) best = &content;
    return best ? *best : FinSeq{};
  }
  std::uint64_t committed_len() const override { return 0; }  // the infinite row is still open

 private:
  std::map<std::uint64_t, FinSeq> rows_;
};

// ---- lasso analysis ----

bool all_admissible(const AlphabetSpec& a, const LassoRun& run) {
  for (const auto& e : run.prefix)
    if (!a.admits(e.ii)) return false;
  for (const auto& e : run.period)
    if (!a.admits(e.ii)) return false;
  return true;
}

RuleVerdict l_verdict(const AlphabetSpec& a, const LassoRun& run) {
  return all_admissible(a, run) ? RuleVerdict::InRules : RuleVerdict::OutRules;
}

RuleVerdict w_verdict(const AlphabetSpec& a, const LassoRun& run) {
  if (!all_admissible(a, run)) return RuleVerdict::OutRules;
  for (const auto& e : run.period)
    if (!e.ii.is_pass()) return RuleVerdict::InRules;
  return RuleVerdict::OutRules;  // eventually all passes
}

RuleVerdict klip_verdict(const AlphabetSpec& a, std::uint64_t k, const LassoRun& run) {
  if (!all_admissible(a, run)) return RuleVerdict::OutRules;
  // A period move recurs at unboundedly large turns, so turns below k must
  // all fall inside the prefix.
  if (run.prefix.size() < k) return RuleVerdict::OutRules;
  for (std::size_t t = 0; t < run.prefix.size(); ++t) {
    const bool want_pass = t < k;
    if (run.prefix[t].ii.is_pass() != want_pass) return RuleVerdict::OutRules;
  }
  for (const auto& e : run.period)
    if (e.ii.is_pass()) return RuleVerdict::OutRules;
  return RuleVerdict::InRules;
}

std::int64_t eraser_net(const Transcript& t) {
  std::int64_t net = 0;
  for (const auto& e : t) net += e.ii.is_nat() ? 1 : (e.ii.is_erase() ? -1 : 0);
  return net;
}

RuleVerdict e_verdict(const AlphabetSpec& a, const LassoRun& run) {
  if (!all_admissible(a, run)) return RuleVerdict::OutRules;
  // The stack depth diverges iff each period strictly grows it.
  return eraser_net(run.period) > 0 ? RuleVerdict::InRules : RuleVerdict::OutRules;
}

RuleVerdict bt_verdict(const AlphabetSpec& a, const LassoRun& run) {
  if (!all_admissible(a, run)) return RuleVerdict::OutRules;
  bool has_digit = false;
  for (const auto& e : run.period) {
    if (e.ii.is_bt()) return RuleVerdict::OutRules;  // infinitely many backtracks
    if (e.ii.is_nat()) has_digit = true;
  }
  return has_digit ? RuleVerdict::InRules : RuleVerdict::OutRules;
}

std::set<std::uint64_t> rows_written(const Transcript& t) {
  std::set<std::uint64_t> rows;
  for (const auto& e : t)
    if (e.ii.is_row() && !e.ii.inner_pass) rows.insert(e.ii.row);
  return rows;
}

RuleVerdict m_verdict(const AlphabetSpec& a, const LassoRun& run) {
  if (!all_admissible(a, run)) return RuleVerdict::OutRules;
  return rows_written(run.period).size() == 1 ? RuleVerdict::InRules : RuleVerdict::OutRules;
}

void require_in_rules(RuleVerdict v) {
  if (v != RuleVerdict::InRules)
    throw GameError(ErrKind::RuleViolation, "up_output on a run outside the rules");
}

FinSeq nat_digits(const Transcript& t) {
  FinSeq out;
  for (const auto& e : t)
    if (e.ii.is_nat()) out.push_back(e.ii.nat);
  return out;
}

UPStream l_output(const LassoRun& run) {
  return UPStream(nat_digits(run.prefix), nat_digits(run.period));
}

UPStream w_output(const LassoRun& run) {
  return UPStream(nat_digits(run.prefix), nat_digits(run.period));
}

UPStream klip_output(std::uint64_t k, const LassoRun& run) {
  Transcript tail(run.prefix.begin() + static_cast<std::ptrdiff_t>(k), run.prefix.end());
  return UPStream(nat_digits(tail), nat_digits(run.period));
}

void eraser_apply(FinSeq& st, const Move& m) {
  if (m.is_nat())
    st.push_back(m.nat);
  else if (m.is_erase() && !st.empty())
    st.pop_back();
}

UPStream e_output(const LassoRun& run) {
  FinSeq st;
  for (const auto& e : run.prefix) eraser_apply(st, e.ii);
  std::int64_t cum = 0, mn = 0;
  for (const auto& e : run.period) {
    cum += e.ii.is_nat() ? 1 : -1;
    mn = std::min(mn, cum);
  }
  const std::uint64_t m = static_cast<std::uint64_t>(-mn);
  const std::uint64_t delta = static_cast<std::uint64_t>(cum);
  // Grow until one whole period runs without touching the clamp, then one
  // clean period freezes the frontier and exposes the repeating block.
  while (st.size() < m)
    for (const auto& e : run.period) eraser_apply(st, e.ii);
  const std::uint64_t frontier = st.size() - m;
  for (const auto& e : run.period) eraser_apply(st, e.ii);
  FinSeq out_prefix(st.begin(), st.begin() + static_cast<std::ptrdiff_t>(frontier));
  FinSeq out_period(st.begin() + static_cast<std::ptrdiff_t>(frontier),
                    st.begin() + static_cast<std::ptrdiff_t>(frontier + delta));
  return UPStream(std::move(out_prefix), std::move(out_period));
}

UPStream bt_output(const LassoRun& run) {
  FinSeq pre;
  for (const auto& e : run.prefix) {
    if (e.ii.is_bt())
      pre.clear();
    else if (e.ii.is_nat())
      pre.push_back(e.ii.nat);
  }
  return UPStream(std::move(pre), nat_digits(run.period));
}

UPStream m_output(const LassoRun& run) {
  const std::uint64_t row = *rows_written(run.period).begin();
  auto row_digits = [row](const Transcript& t) {
    FinSeq out;
    for (const auto& e : t)
      if (e.ii.is_row() && !e.ii.inner_pass && e.ii.row == row) out.push_back(e.ii.nat);
    return out;
  };
  return UPStream(row_digits(run.prefix), row_digits(run.period));
}

}  // namespace

FinSeq eraser_eval(const MoveSeq& s) {
  FinSeq st;
  for (const Move& m : s) eraser_apply(st, m);
  return st;
}

GameSpec make_base_game(GameKind kind, std::uint64_t k, DetOmegaAutomaton domain) {
  domain.validate();
  GameSpec G;
  G.kind = kind;
  G.klip_k = k;
  G.domain = std::move(domain);
  G.delayable = true;
  switch (kind) {
    case GameKind::L:
      G.alphabet = {.nat = true};
      G.shape = LegalityShape{GameKind::L, 0, 0, false};
      G.monitor_factory = [a = G.alphabet] { return std::make_unique<LMonitor>(a); };
      G.interpreter_factory = [] { return std::make_unique<DigitsInterp>(); };
      G.up_verdict = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        return l_verdict(a, r);
      };
      G.up_output = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        require_in_rules(l_verdict(a, r));
        return l_output(r);
      };
      break;
    case GameKind::W:
      G.alphabet = {.nat = true, .pass = true};
      G.p_closed = true;
      G.shape = LegalityShape{GameKind::W, 0, 0, false};
      G.monitor_factory = [a = G.alphabet] { return std::make_unique<WMonitor>(a); };
      G.interpreter_factory = [] { return std::make_unique<DigitsInterp>(); };
      G.up_verdict = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        return w_verdict(a, r);
      };
      G.up_output = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        require_in_rules(w_verdict(a, r));
        return w_output(r);
      };
      break;
    case GameKind::KLip:
      G.alphabet = {.nat = true, .pass = true};
      G.shape = LegalityShape{GameKind::KLip, k, 0, false};
      G.monitor_factory = [a = G.alphabet, k] { return std::make_unique<KLipMonitor>(a, k); };
      G.interpreter_factory = [k] { return std::make_unique<DigitsInterp>(k); };
      G.up_verdict = [a = G.alphabet, k](const LassoRun& r, const LassoContext&) {
        return klip_verdict(a, k, r);
      };
      G.up_output = [a = G.alphabet, k](const LassoRun& r, const LassoContext&) {
        require_in_rules(klip_verdict(a, k, r));
        return klip_output(k, r);
      };
      break;
    case GameKind::E:
      G.alphabet = {.nat = true, .erase = true};
      G.shape = LegalityShape{GameKind::E, 0, 0, false};
      G.monitor_factory = [a = G.alphabet] { return std::make_unique<EMonitor>(a); };
      G.interpreter_factory = [] { return std::make_unique<EraserInterp>(); };
      G.up_verdict = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        return e_verdict(a, r);
      };
      G.up_output = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        require_in_rules(e_verdict(a, r));
        return e_output(r);
      };
      break;
    case GameKind::Bt:
      G.alphabet = {.nat = true, .pass = true, .bt = true};
      G.shape = LegalityShape{GameKind::Bt, 0, 0, false};
      G.monitor_factory = [a = G.alphabet] { return std::make_unique<BtMonitor>(a); };
      G.interpreter_factory = [] { return std::make_unique<BtInterp>(); };
      G.up_verdict = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        return bt_verdict(a, r);
      };
      G.up_output = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        require_in_rules(bt_verdict(a, r));
        return bt_output(r);
      };
      break;
    case GameKind::M:
      G.alphabet = {.rows = true};
      G.shape = LegalityShape{GameKind::M, 0, 0, false};
      G.monitor_factory = [a = G.alphabet] { return std::make_unique<MMonitor>(a); };
      G.interpreter_factory = [] { return std::make_unique<MultitapeInterp>(); };
      G.up_verdict = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        return m_verdict(a, r);
      };
      G.up_output = [a = G.alphabet](const LassoRun& r, const LassoContext&) {
        require_in_rules(m_verdict(a, r));
        return m_output(r);
      };
      break;
  }
  return G;
}

namespace {

class PClosedMonitor : public RuleMonitor {
 public:
  explicit PClosedMonitor(std::unique_ptr<RuleMonitor> inner) : inner_(std::move(inner)) {}
  std::vector<std::string> pending_obligations() const override {
    auto obs = inner_->pending_obligations();
    obs.push_back("infinitely many non-pass moves");
    return obs;
  }

 protected:
  std::optional<std::string> do_step(Digit i, const Move& ii) override {
    if (ii.is_pass()) return std::nullopt;
    if (inner_->step(i, ii) == StepStatus::Violated) return inner_->violation_reason();
    return std::nullopt;
  }

 private:
  std::unique_ptr<RuleMonitor> inner_;
};

class FilterInterp : public Interpreter {
 public:
  explicit FilterInterp(std::unique_ptr<Interpreter> inner) : inner_(std::move(inner)) {}
  void step(Digit i, const Move& ii) override {
    if (!ii.is_pass()) inner_->step(i, ii);
  }
  FinSeq tentative() const override { return inner_->tentative(); }
  std::uint64_t committed_len() const override { return inner_->committed_len(); }

 private:
  std::unique_ptr<Interpreter> inner_;
};

LassoRun filter_passes(const LassoRun& run) {
  LassoRun f;
  for (const auto& e : run.prefix)
    if (!e.ii.is_pass()) f.prefix.push_back(e);
  for (const auto& e : run.period)
    if (!e.ii.is_pass()) f.period.push_back(e);
  return f;
}

class DelayMonitor : public RuleMonitor {
 public:
  DelayMonitor(std::unique_ptr<RuleMonitor> inner, std::uint64_t n)
      : inner_(std::move(inner)), n_(n) {}
  std::vector<std::string> pending_obligations() const override {
    return inner_->pending_obligations();
  }

 protected:
  std::optional<std::string> do_step(Digit i, const Move& ii) override {
    const std::uint64_t t = turn_++;
    if (t < n_) {
      if (!ii.is_pass()) return "expected a pass during the delay";
      return std::nullopt;
    }
    if (ii.is_pass()) return "pass after the delay";
    if (inner_->step(i, ii) == StepStatus::Violated) return inner_->violation_reason();
    return std::nullopt;
  }

 private:
  std::unique_ptr<RuleMonitor> inner_;
  std::uint64_t n_;
  std::uint64_t turn_ = 0;
};

class DelayInterp : public Interpreter {
 public:
  DelayInterp(std::unique_ptr<Interpreter> inner, std::uint64_t n)
      : inner_(std::move(inner)), n_(n) {}
  void step(Digit i, const Move& ii) override {
    if (turn_++ >= n_) inner_->step(i, ii);
  }
  FinSeq tentative() const override { return inner_->tentative(); }
  std::uint64_t committed_len() const override { return inner_->committed_len(); }

 private:
  std::unique_ptr<Interpreter> inner_;
  std::uint64_t n_;
  std::uint64_t turn_ = 0;
};

}  // namespace

GameSpec p_close(const GameSpec& G) {
  if (G.alphabet.pass) {
    if (G.p_closed) return G;
    throw GameError(ErrKind::InvalidArgument, "p_close: game already uses passes");
  }
  GameSpec P = G;
  P.alphabet.pass = true;
  P.p_closed = true;
  if (G.shape && G.shape->delay_n == 0 && !G.shape->p_closed_wrapper) {
    P.shape = *G.shape;
    P.shape->p_closed_wrapper = true;
  } else {
    P.shape.reset();
  }
  P.monitor_factory = [mf = G.monitor_factory] {
    return std::make_unique<PClosedMonitor>(mf());
  };
  P.interpreter_factory = [ifc = G.interpreter_factory] {
    return std::make_unique<FilterInterp>(ifc());
  };
  P.up_verdict = [uv = G.up_verdict](const LassoRun& r, const LassoContext& ctx) {
    LassoRun f = filter_passes(r);
    if (f.period.empty()) return RuleVerdict::OutRules;  // eventually all passes
    return uv(f, ctx);
  };
  P.up_output = [uo = G.up_output, uv = G.up_verdict](const LassoRun& r, const LassoContext& ctx) {
    LassoRun f = filter_passes(r);
    if (f.period.empty())
      throw GameError(ErrKind::RuleViolation, "up_output on a run outside the rules");
    return uo(f, ctx);
  };
  return P;
}

GameSpec delay(const GameSpec& G, std::uint64_t n) {
  if (n == 0) return G;
  GameSpec D = G;
  D.alphabet.pass = true;
  D.p_closed = false;
  if (G.shape && G.shape->delay_n == 0 && !G.shape->p_closed_wrapper && !G.alphabet.pass) {
    D.shape = *G.shape;
    D.shape->delay_n = n;
  } else {
    D.shape.reset();
  }
  D.monitor_factory = [mf = G.monitor_factory, n] {
    return std::make_unique<DelayMonitor>(mf(), n);
  };
  D.interpreter_factory = [ifc = G.interpreter_factory, n] {
    return std::make_unique<DelayInterp>(ifc(), n);
  };
  D.up_verdict = [uv = G.up_verdict, n](const LassoRun& r, const LassoContext& ctx) {
    // Turns below n must sit inside the lasso prefix: period moves recur at
    // arbitrarily late turns.
    if (r.prefix.size() < n) return RuleVerdict::OutRules;
    LassoRun shifted;
    for (std::size_t t = 0; t < r.prefix.size(); ++t) {
      if (t < n) {
        if (!r.prefix[t].ii.is_pass()) return RuleVerdict::OutRules;
      } else {
        if (r.prefix[t].ii.is_pass()) return RuleVerdict::OutRules;
        shifted.prefix.push_back(r.prefix[t]);
      }
    }
    for (const auto& e : r.period) {
      if (e.ii.is_pass()) return RuleVerdict::OutRules;
      shifted.period.push_back(e);
    }
    return uv(shifted, ctx);
  };
  D.up_output = [uo = G.up_output, n](const LassoRun& r, const LassoContext& ctx) {
    if (r.prefix.size() < n)
      throw GameError(ErrKind::RuleViolation, "up_output on a run outside the rules");
    LassoRun shifted;
    shifted.prefix.assign(r.prefix.begin() + static_cast<std::ptrdiff_t>(n), r.prefix.end());
    shifted.period = r.period;
    return uo(shifted, ctx);
  };
  return D;
}

}  // namespace rgames
