#include "rgames/strategy.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "graph_util.hpp"
#include "rgames/engine.hpp"
#include "rgames/rng.hpp"

namespace rgames {
namespace {

std::string key_str(const SessionKey& k) {
  std::ostringstream os;
  os << (k.supported ? 1 : 0) << ',' << k.a << ',' << k.s.size() << ':' << k.s;
  return os.str();
}

std::uint64_t phase_of(const UPStream& x, std::uint64_t t) {
  const std::uint64_t P = x.prefix().size();
  const std::uint64_t L = x.period().size();
  return t < P ? t : P + (t - P) % L;
}

}  // namespace

Move IIStrategy::respond(const FinSeq& s) const {
  if (s.empty()) throw GameError(ErrKind::InvalidArgument, "respond: empty prefix");
  auto ses = session();
  Move m;
  for (Digit d : s) m = ses->on_digit(d);
  return m;
}

Digit IStrategy::respond(const MoveSeq& t) const {
  auto ses = session();
  Digit d = ses->next();
  for (const Move& m : t) {
    ses->on_reply(m);
    d = ses->next();
  }
  return d;
}

// ---------------------------------------------------------------------------
// Adapters and basic strategies.

namespace {

class MealyIISession final : public IISession {
 public:
  MealyIISession(const MealyStrategy* m, std::uint32_t q) : m_(m), q_(q) {}
  Move on_digit(Digit d) override {
    const MealyEdge& e = m_->edge(q_, d);
    const Move out = e.emit(d);
    q_ = e.next;
    return out;
  }
  SessionKey key() const override { return {true, q_, ""}; }

 private:
  const MealyStrategy* m_;
  std::uint32_t q_;
};

class MealyII final : public IIStrategy {
 public:
  explicit MealyII(MealyStrategy m) : m_(std::move(m)) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<MealyIISession>(&m_, m_.initial);
  }

 private:
  MealyStrategy m_;
};

class MealyISessionImpl final : public ISession {
 public:
  MealyISessionImpl(const MealyStrategyI* m, std::uint32_t q) : m_(m), q_(q) {}
  Digit next() override { return m_->nodes[q_].out; }
  void on_reply(const Move& m) override { q_ = m_->step(q_, m); }
  SessionKey key() const override { return {true, q_, ""}; }

 private:
  const MealyStrategyI* m_;
  std::uint32_t q_;
};

class MealyI final : public IStrategy {
 public:
  explicit MealyI(MealyStrategyI m) : m_(std::move(m)) {}
  std::unique_ptr<ISession> session() const override {
    return std::make_unique<MealyISessionImpl>(&m_, m_.initial);
  }

 private:
  MealyStrategyI m_;
};

class ConstSession final : public IISession {
 public:
  explicit ConstSession(const UPStream* y) : y_(y) {}
  Move on_digit(Digit) override { return Move::nat_move(y_->at(pos_++)); }
  SessionKey key() const override { return {true, phase_of(*y_, pos_), ""}; }

 private:
  const UPStream* y_;
  std::uint64_t pos_ = 0;
};

class ConstII final : public IIStrategy {
 public:
  explicit ConstII(UPStream y) : y_(std::move(y)) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<ConstSession>(&y_);
  }
  std::optional<MoveLasso> direct_move_lasso(const UPStream&) const override {
    MoveLasso ml;
    for (Digit d : y_.prefix()) ml.prefix.push_back(Move::nat_move(d));
    for (Digit d : y_.period()) ml.period.push_back(Move::nat_move(d));
    return ml;
  }

 private:
  UPStream y_;
};

class IdSession final : public IISession {
 public:
  Move on_digit(Digit d) override { return Move::nat_move(d); }
  SessionKey key() const override { return {true, 0, ""}; }
};

class IdII final : public IIStrategy {
 public:
  std::unique_ptr<IISession> session() const override { return std::make_unique<IdSession>(); }
  std::optional<MoveLasso> direct_move_lasso(const UPStream& x) const override {
    MoveLasso ml;
    for (Digit d : x.prefix()) ml.prefix.push_back(Move::nat_move(d));
    for (Digit d : x.period()) ml.period.push_back(Move::nat_move(d));
    return ml;
  }
};

class ConstISession final : public ISession {
 public:
  explicit ConstISession(const UPStream* x) : x_(x) {}
  Digit next() override { return x_->at(pos_++); }
  void on_reply(const Move&) override {}
  SessionKey key() const override { return {true, phase_of(*x_, pos_), ""}; }

 private:
  const UPStream* x_;
  std::uint64_t pos_ = 0;
};

class ConstI final : public IStrategy {
 public:
  explicit ConstI(UPStream x) : x_(std::move(x)) {}
  std::unique_ptr<ISession> session() const override {
    return std::make_unique<ConstISession>(&x_);
  }

 private:
  UPStream x_;
};

class TableSession final : public IISession {
 public:
  TableSession(const std::map<FinSeq, Move>* t, const Move* fb) : t_(t), fb_(fb) {}
  Move on_digit(Digit d) override {
    s_.push_back(d);
    auto it = t_->find(s_);
    return it == t_->end() ? *fb_ : it->second;
  }

 private:
  const std::map<FinSeq, Move>* t_;
  const Move* fb_;
  FinSeq s_;
};

class TableII final : public IIStrategy {
 public:
  TableII(std::map<FinSeq, Move> t, Move fb) : t_(std::move(t)), fb_(fb) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<TableSession>(&t_, &fb_);
  }

 private:
  std::map<FinSeq, Move> t_;
  Move fb_;
};

}  // namespace

IIStrategyPtr as_strategy(MealyStrategy m) {
  m.validate();
  return std::make_shared<MealyII>(std::move(m));
}

IStrategyPtr as_strategy_i(MealyStrategyI m) {
  m.validate();
  return std::make_shared<MealyI>(std::move(m));
}

IIStrategyPtr const_strategy(UPStream y) { return std::make_shared<ConstII>(std::move(y)); }

IIStrategyPtr id_strategy() { return std::make_shared<IdII>(); }

IStrategyPtr const_strategy_i(UPStream x) { return std::make_shared<ConstI>(std::move(x)); }

IIStrategyPtr table_strategy(std::map<FinSeq, Move> table, Move fallback) {
  return std::make_shared<TableII>(std::move(table), fallback);
}

// ---------------------------------------------------------------------------
// Combinators.

namespace {

class TensorII;

class TensorSession final : public IISession {
 public:
  explicit TensorSession(const TensorII* o) : o_(o) {}
  Move on_digit(Digit d) override;

 private:
  const TensorII* o_;
  std::vector<std::unique_ptr<IISession>> row_ses_;
  std::vector<std::uint64_t> fed_;
  FinSeq hist_;
  std::uint64_t t_ = 0;
};

class TensorII final : public IIStrategy {
 public:
  TensorII(std::vector<IIStrategyPtr> rows, IIStrategyPtr tail)
      : rows_(std::move(rows)), tail_(std::move(tail)) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<TensorSession>(this);
  }
  const IIStrategy& row(std::uint64_t n) const {
    if (n < rows_.size()) {
      if (!rows_[n]) throw GameError(ErrKind::InvalidArgument, "tensor: null row strategy");
      return *rows_[n];
    }
    if (!tail_) throw GameError(ErrKind::InvalidArgument, "tensor: no strategy for tail row");
    return *tail_;
  }

 private:
  std::vector<IIStrategyPtr> rows_;
  IIStrategyPtr tail_;
};

Move TensorSession::on_digit(Digit d) {
  hist_.push_back(d);
  const auto [n, m] = unpair(t_);
  ++t_;
  while (row_ses_.size() <= n) {
    row_ses_.push_back(o_->row(row_ses_.size()).session());
    fed_.push_back(0);
  }
  Move last = Move::pass();
  auto& ses = *row_ses_[n];
  for (std::uint64_t j = fed_[n]; j <= m; ++j) last = ses.on_digit(hist_[j]);
  fed_[n] = m + 1;
  return last;
}

class ProjSession final : public IISession {
 public:
  ProjSession(std::unique_ptr<IISession> inner, std::uint64_t n)
      : inner_(std::move(inner)), n_(n) {}
  Move on_digit(Digit d) override {
    // The projection lives on the same clock as the interleaved game: the
    // inner strategy sees every digit, and only its row-n answers surface.
    const Move m = inner_->on_digit(d);
    const auto [a, mm] = unpair(t_);
    (void)mm;
    ++t_;
    return a == n_ ? m : Move::pass();
  }
  SessionKey key() const override {
    const SessionKey ki = inner_->key();
    // Row-n turns are the t with t+1 = 2^n (odd), periodic in t mod 2^(n+1).
    if (!ki.supported || n_ >= 60) return {};
    SessionKey k;
    k.supported = true;
    std::ostringstream os;
    os << "proj," << n_ << ',' << (t_ & ((std::uint64_t{1} << (n_ + 1)) - 1)) << ','
       << key_str(ki);
    k.s = os.str();
    return k;
  }

 private:
  std::unique_ptr<IISession> inner_;
  std::uint64_t n_;
  std::uint64_t t_ = 0;
};

class ProjII final : public IIStrategy {
 public:
  ProjII(IIStrategyPtr tau, std::uint64_t n) : tau_(std::move(tau)), n_(n) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<ProjSession>(tau_->session(), n_);
  }

 private:
  IIStrategyPtr tau_;
  std::uint64_t n_;
};

class ComposeSession final : public IISession {
 public:
  ComposeSession(std::unique_ptr<IISession> s0, std::unique_ptr<IISession> s1,
                 std::unique_ptr<Interpreter> mid, bool digit_style)
      : s0_(std::move(s0)), s1_(std::move(s1)), mid_(std::move(mid)), digit_style_(digit_style) {}

  Move on_digit(Digit d) override {
    const Move m0 = s0_->on_digit(d);
    mid_->step(d, m0);
    const FinSeq tent = mid_->tentative();
    const std::uint64_t committed = std::min<std::uint64_t>(mid_->committed_len(), tent.size());
    if (fed_ < committed) {
      const Digit c = tent[fed_++];
      return s1_->on_digit(c);
    }
    return Move::pass();
  }

  SessionKey key() const override {
    const SessionKey k0 = s0_->key();
    const SessionKey k1 = s1_->key();
    SessionKey k;
    k.supported = digit_style_ && k0.supported && k1.supported;
    if (!k.supported) return k;
    const FinSeq tent = mid_->tentative();
    const std::uint64_t committed = std::min<std::uint64_t>(mid_->committed_len(), tent.size());
    std::ostringstream os;
    os << "cmp," << key_str(k0) << '|' << key_str(k1) << '|';
    for (std::uint64_t j = fed_; j < committed; ++j) os << tent[j] << ',';
    k.s = os.str();
    return k;
  }

 private:
  std::unique_ptr<IISession> s0_, s1_;
  std::unique_ptr<Interpreter> mid_;
  bool digit_style_;
  std::uint64_t fed_ = 0;
};

class ComposeII final : public IIStrategy {
 public:
  ComposeII(IIStrategyPtr t1, IIStrategyPtr t0, GameSpec mid)
      : t1_(std::move(t1)), t0_(std::move(t0)), mid_(std::move(mid)) {
    digit_style_ = mid_.kind == GameKind::L || mid_.kind == GameKind::W ||
                   mid_.kind == GameKind::KLip;
  }
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<ComposeSession>(t0_->session(), t1_->session(),
                                            mid_.interpreter_factory(), digit_style_);
  }

 private:
  IIStrategyPtr t1_, t0_;
  GameSpec mid_;
  bool digit_style_;
};

}  // namespace

IIStrategyPtr tensor_strategies(std::vector<IIStrategyPtr> rows, IIStrategyPtr tail) {
  return std::make_shared<TensorII>(std::move(rows), std::move(tail));
}

IIStrategyPtr project_strategy(IIStrategyPtr tau, std::uint64_t n) {
  if (!tau) throw GameError(ErrKind::InvalidArgument, "project_strategy: null strategy");
  return std::make_shared<ProjII>(std::move(tau), n);
}

IIStrategyPtr compose_strategies(IIStrategyPtr tau1, IIStrategyPtr tau0, const GameSpec& mid) {
  if (!tau1 || !tau0)
    throw GameError(ErrKind::InvalidArgument, "compose_strategies: null strategy");
  if (!mid.interpreter_factory)
    throw GameError(ErrKind::InvalidArgument, "compose_strategies: middle game lacks an interpreter");
  return std::make_shared<ComposeII>(std::move(tau1), std::move(tau0), mid);
}

// ---------------------------------------------------------------------------
// Delay transducers.

void DelayTransducer::validate() const {
  if (nodes.empty()) throw GameError(ErrKind::InvalidArgument, "transducer: no states");
  if (initial >= nodes.size())
    throw GameError(ErrKind::InvalidArgument, "transducer: initial state out of range");
  for (const DelayNode& n : nodes) {
    for (const auto& [d, e] : n.edges)
      if (e.next >= nodes.size())
        throw GameError(ErrKind::InvalidArgument, "transducer: edge target out of range");
    if (n.otherwise.next >= nodes.size())
      throw GameError(ErrKind::InvalidArgument, "transducer: edge target out of range");
  }
}

void DelayTransducer::check_budget() const {
  validate();
  const std::size_t n = nodes.size();
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> adj(n);
  for (std::size_t q = 0; q < n; ++q) {
    for (const auto& [d, e] : nodes[q].edges)
      adj[q].push_back({e.next, 1 - static_cast<std::int64_t>(e.emits.size())});
    adj[q].push_back(
        {nodes[q].otherwise.next, 1 - static_cast<std::int64_t>(nodes[q].otherwise.emits.size())});
  }
  constexpr std::int64_t NEG = std::numeric_limits<std::int64_t>::min() / 4;
  constexpr std::int64_t POS = std::numeric_limits<std::int64_t>::max() / 4;
  // Longest deficit path; a still-relaxable edge after n rounds is a cycle
  // that reads more than it emits.
  std::vector<std::int64_t> hi(n, NEG);
  hi[initial] = 0;
  for (std::size_t round = 0; round <= n; ++round) {
    bool changed = false;
    for (std::size_t q = 0; q < n; ++q) {
      if (hi[q] == NEG) continue;
      for (const auto& [t, w] : adj[q])
        if (hi[q] + w > hi[t]) {
          hi[t] = hi[q] + w;
          changed = true;
        }
    }
    if (!changed) break;
    if (round == n)
      throw GameError(ErrKind::BudgetViolation,
                      "transducer: a reachable cycle emits fewer digits than it reads");
  }
  // Shortest deficit path; a still-relaxable edge is a cycle emitting more
  // than it reads, which would unbound the output queue.
  std::vector<std::int64_t> lo(n, POS);
  lo[initial] = 0;
  for (std::size_t round = 0; round <= n; ++round) {
    bool changed = false;
    for (std::size_t q = 0; q < n; ++q) {
      if (lo[q] == POS) continue;
      for (const auto& [t, w] : adj[q])
        if (lo[q] + w < lo[t]) {
          lo[t] = lo[q] + w;
          changed = true;
        }
    }
    if (!changed) break;
    if (round == n)
      throw GameError(ErrKind::BudgetViolation,
                      "transducer: a reachable cycle emits more digits than it reads");
  }
  for (std::size_t q = 0; q < n; ++q)
    if (hi[q] != NEG && hi[q] > static_cast<std::int64_t>(budget))
      throw GameError(ErrKind::BudgetViolation,
                      "transducer: output deficit exceeds the declared budget");
}

FinSeq DelayTransducer::run_on(const FinSeq& input) const {
  std::uint32_t q = initial;
  FinSeq out;
  for (Digit d : input) {
    auto it = nodes[q].edges.find(d);
    const DelayEdge& e = it == nodes[q].edges.end() ? nodes[q].otherwise : it->second;
    for (const DelayEmit& em : e.emits) out.push_back(em.echo ? d : em.d);
    q = e.next;
  }
  return out;
}

DelayTransducer identity_transducer() {
  DelayTransducer f;
  f.nodes.resize(1);
  f.nodes[0].otherwise = {0, {DelayEmit{true, 0}}};
  f.budget = 0;
  return f;
}

DelayTransducer shift_transducer(std::uint64_t k) {
  DelayTransducer f;
  f.nodes.resize(k + 1);
  for (std::uint64_t i = 0; i < k; ++i)
    f.nodes[i].otherwise = {static_cast<std::uint32_t>(i + 1), {}};
  f.nodes[k].otherwise = {static_cast<std::uint32_t>(k), {DelayEmit{true, 0}}};
  f.budget = k;
  return f;
}

namespace {

class LipSession final : public IISession {
 public:
  LipSession(const DelayTransducer* f) : f_(f), q_(f->initial) {}
  Move on_digit(Digit d) override {
    auto it = f_->nodes[q_].edges.find(d);
    const DelayEdge& e = it == f_->nodes[q_].edges.end() ? f_->nodes[q_].otherwise : it->second;
    for (const DelayEmit& em : e.emits) queue_.push_back(em.echo ? d : em.d);
    q_ = e.next;
    const std::uint64_t turn = t_++;
    if (turn < f_->budget) return Move::pass();
    if (queue_.empty())
      throw GameError(ErrKind::BudgetViolation, "compiled transducer under-produced at runtime");
    const Digit out = queue_.front();
    queue_.pop_front();
    return Move::nat_move(out);
  }
  SessionKey key() const override {
    std::ostringstream os;
    os << "lip," << q_ << ',' << std::min<std::uint64_t>(t_, f_->budget) << ',';
    for (Digit d : queue_) os << d << ',';
    return {true, 0, os.str()};
  }

 private:
  const DelayTransducer* f_;
  std::uint32_t q_;
  std::deque<Digit> queue_;
  std::uint64_t t_ = 0;
};

class LipII final : public IIStrategy {
 public:
  explicit LipII(DelayTransducer f) : f_(std::move(f)) {}
  std::unique_ptr<IISession> session() const override { return std::make_unique<LipSession>(&f_); }

 private:
  DelayTransducer f_;
};

}  // namespace

IIStrategyPtr lipschitz_compile(const DelayTransducer& f) {
  f.check_budget();
  return std::make_shared<LipII>(f);
}

// ---------------------------------------------------------------------------
// Transfers.

namespace {

class KlipISession final : public ISession {
 public:
  KlipISession(std::unique_ptr<ISession> inner, std::uint64_t k)
      : inner_(std::move(inner)), k_(k) {}
  Digit next() override { return inner_->next(); }
  void on_reply(const Move& m) override {
    if (t_ < k_)
      inner_->on_reply(Move::nat_move(0));
    else
      inner_->on_reply(m.is_nat() ? m : Move::nat_move(0));
    ++t_;
  }
  SessionKey key() const override {
    const SessionKey ki = inner_->key();
    SessionKey k;
    k.supported = ki.supported;
    std::ostringstream os;
    os << "klipI," << std::min(t_, k_) << ',' << key_str(ki);
    k.s = os.str();
    return k;
  }

 private:
  std::unique_ptr<ISession> inner_;
  std::uint64_t k_;
  std::uint64_t t_ = 0;
};

class KlipI final : public IStrategy {
 public:
  KlipI(IStrategyPtr inner, std::uint64_t k) : inner_(std::move(inner)), k_(k) {}
  std::unique_ptr<ISession> session() const override {
    return std::make_unique<KlipISession>(inner_->session(), k_);
  }

 private:
  IStrategyPtr inner_;
  std::uint64_t k_;
};

class KlipIISession final : public IISession {
 public:
  KlipIISession(std::unique_ptr<IISession> inner, std::uint64_t k, const UPStream* fb)
      : inner_(std::move(inner)), k_(k), fb_(fb) {}
  Move on_digit(Digit d) override {
    const Move r = inner_->on_digit(d);
    const std::uint64_t turn = t_++;
    if (turn < k_) {
      if (!(r.is_nat() && r.nat == 0)) guard_ = false;
      return Move::pass();
    }
    if (guard_ && r.is_nat()) return r;
    guard_ = false;
    return Move::nat_move(fb_->at(out_++));
  }
  SessionKey key() const override {
    const SessionKey ki = inner_->key();
    SessionKey k;
    k.supported = ki.supported;
    std::ostringstream os;
    os << "klipII," << std::min(t_, k_) << ',' << (guard_ ? 1 : 0) << ','
       << (guard_ ? 0 : phase_of(*fb_, out_)) << ',' << key_str(ki);
    k.s = os.str();
    return k;
  }

 private:
  std::unique_ptr<IISession> inner_;
  std::uint64_t k_;
  const UPStream* fb_;
  std::uint64_t t_ = 0;
  std::uint64_t out_ = 0;
  bool guard_ = true;
};

class KlipII final : public IIStrategy {
 public:
  KlipII(IIStrategyPtr inner, std::uint64_t k, UPStream fb)
      : inner_(std::move(inner)), k_(k), fb_(std::move(fb)) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<KlipIISession>(inner_->session(), k_, &fb_);
  }

 private:
  IIStrategyPtr inner_;
  std::uint64_t k_;
  UPStream fb_;
};

}  // namespace

IStrategyPtr klip_transfer_I(IStrategyPtr sigma, std::uint64_t k) {
  if (!sigma) throw GameError(ErrKind::InvalidArgument, "klip_transfer_I: null strategy");
  return std::make_shared<KlipI>(std::move(sigma), k);
}

IIStrategyPtr klip_transfer_II(IIStrategyPtr tau, std::uint64_t k, UPStream fallback) {
  if (!tau) throw GameError(ErrKind::InvalidArgument, "klip_transfer_II: null strategy");
  return std::make_shared<KlipII>(std::move(tau), k, std::move(fallback));
}

// ---------------------------------------------------------------------------
// Pass elimination for the eraser game.

namespace {

MoveSeq expand_pass_blocks(const MoveSeq& in) {
  MoveSeq out;
  out.reserve(in.size());
  for (const Move& m : in) {
    if (m.is_pass()) {
      out.push_back(Move::nat_move(0));
      out.push_back(Move::erase());
    } else {
      out.push_back(m);
    }
  }
  return out;
}

class PElimSession final : public IISession {
 public:
  explicit PElimSession(std::unique_ptr<IISession> inner) : inner_(std::move(inner)) {}
  Move on_digit(Digit d) override {
    pending_.push_back(d);
    if (half_) {
      half_ = false;
      return Move::erase();
    }
    const Digit c = pending_.front();
    pending_.pop_front();
    const Move m = inner_->on_digit(c);
    if (m.is_pass()) {
      half_ = true;
      return Move::nat_move(0);
    }
    return m;
  }

 private:
  std::unique_ptr<IISession> inner_;
  std::deque<Digit> pending_;
  bool half_ = false;
};

class PElimII final : public IIStrategy {
 public:
  explicit PElimII(IIStrategyPtr inner) : inner_(std::move(inner)) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<PElimSession>(inner_->session());
  }
  std::optional<MoveLasso> direct_move_lasso(const UPStream& x) const override {
    LassoRun r;
    try {
      r = exact_run(*inner_, x);
    } catch (const GameError& e) {
      if (e.kind() == ErrKind::Undetermined || e.kind() == ErrKind::Overflow) return std::nullopt;
      throw;
    }
    MoveSeq pre, per;
    for (const auto& e : r.prefix) pre.push_back(e.ii);
    for (const auto& e : r.period) per.push_back(e.ii);
    return MoveLasso{expand_pass_blocks(pre), expand_pass_blocks(per)};
  }

 private:
  IIStrategyPtr inner_;
};

}  // namespace

IIStrategyPtr p_eliminate_eraser(IIStrategyPtr tau) {
  if (!tau) throw GameError(ErrKind::InvalidArgument, "p_eliminate_eraser: null strategy");
  return std::make_shared<PElimII>(std::move(tau));
}

// ---------------------------------------------------------------------------
// Legality.

namespace {

struct PEdge {
  std::uint32_t to = 0;
  Digit d = 0;
  Move m;
};

struct Product {
  // node = (machine state, domain state, capped turn)
  std::vector<std::uint32_t> q;
  std::vector<State> a;
  std::vector<std::uint64_t> phi;
  std::vector<std::vector<PEdge>> adj;
  std::vector<std::pair<std::uint32_t, PEdge>> parent;  // BFS tree; self for root
};

bool writes_row(const Move& m) { return m.is_row() && !m.inner_pass; }

std::int64_t eraser_weight(const Move& m) {
  if (m.is_nat()) return 1;
  if (m.is_erase()) return -1;
  return 0;
}

Transcript stem_to(const Product& P, std::uint32_t v) {
  std::vector<TranscriptEntry> rev;
  std::uint32_t w = v;
  while (P.parent[w].first != w) {
    const auto& [u, e] = P.parent[w];
    rev.push_back({e.d, e.m});
    w = u;
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

/// Edge path from `from` to `to` through permitted nodes and edges; empty
/// path when from == to.
std::optional<std::vector<PEdge>> find_path(const Product& P, std::uint32_t from, std::uint32_t to,
                                            const std::function<bool(std::uint32_t)>& node_ok,
                                            const std::function<bool(const PEdge&)>& edge_ok) {
  if (from == to) return std::vector<PEdge>{};
  const std::uint32_t n = static_cast<std::uint32_t>(P.adj.size());
  std::vector<int> pre(n, -1);
  std::vector<PEdge> via(n);
  std::queue<std::uint32_t> bfs;
  bfs.push(from);
  pre[from] = static_cast<int>(from);
  while (!bfs.empty()) {
    const std::uint32_t u = bfs.front();
    bfs.pop();
    for (const PEdge& e : P.adj[u]) {
      if (!node_ok(e.to) || !edge_ok(e) || pre[e.to] != -1) continue;
      pre[e.to] = static_cast<int>(u);
      via[e.to] = e;
      if (e.to == to) {
        std::vector<PEdge> rev;
        std::uint32_t w = to;
        while (w != from) {
          rev.push_back(via[w]);
          w = static_cast<std::uint32_t>(pre[w]);
        }
        std::reverse(rev.begin(), rev.end());
        return rev;
      }
      bfs.push(e.to);
    }
  }
  return std::nullopt;
}

/// A cycle through v using permitted nodes and edges, if any.
std::optional<std::vector<PEdge>> find_cycle_through(
    const Product& P, std::uint32_t v, const std::function<bool(std::uint32_t)>& node_ok,
    const std::function<bool(const PEdge&)>& edge_ok) {
  for (const PEdge& e : P.adj[v]) {
    if (!edge_ok(e) || !node_ok(e.to)) continue;
    auto rest = find_path(P, e.to, v, node_ok, edge_ok);
    if (rest) {
      std::vector<PEdge> cyc{e};
      cyc.insert(cyc.end(), rest->begin(), rest->end());
      return cyc;
    }
  }
  return std::nullopt;
}

Transcript cycle_transcript(const std::vector<PEdge>& cyc) {
  Transcript t;
  for (const PEdge& e : cyc) t.push_back({e.d, e.m});
  return t;
}

LegalityReport illegal_lasso(const Product& P, std::uint32_t anchor,
                             const std::vector<PEdge>& cyc, std::string detail) {
  LegalityReport rep;
  rep.verdict = LegalityReport::Verdict::Illegal;
  rep.lasso_witness = LassoRun{stem_to(P, anchor), cycle_transcript(cyc)};
  rep.detail = std::move(detail);
  return rep;
}

}  // namespace

LegalityReport legality_check_exact(const GameSpec& G, const MealyStrategy& tau) {
  tau.validate();
  G.domain.validate();
  if (!G.shape)
    throw GameError(ErrKind::UnsupportedGame,
                    "legality_check_exact: game has no exactly checkable rule shape");
  const LegalityShape sh = *G.shape;
  const std::uint64_t dn = sh.kind == GameKind::KLip ? sh.k : sh.delay_n;

  std::vector<bool> viable(G.domain.size());
  for (State s = 0; s < G.domain.size(); ++s) viable[s] = nonempty_from(G.domain, s);

  LegalityReport rep;
  if (!viable[G.domain.initial]) {
    rep.verdict = LegalityReport::Verdict::Legal;
    rep.detail = "empty domain: legality is vacuous";
    return rep;
  }

  // Move admissibility at a given capped turn.
  const bool wrapped = sh.p_closed_wrapper;
  auto positional = [&](std::uint64_t phi, const Move& m) -> std::optional<std::string> {
    if (phi < dn) {
      if (!m.is_pass()) return "non-pass move before the delay bound";
      return std::nullopt;
    }
    switch (sh.kind) {
      case GameKind::L:
        if (m.is_nat() || (wrapped && m.is_pass())) return std::nullopt;
        break;
      case GameKind::KLip:
        if (m.is_nat()) return std::nullopt;
        break;
      case GameKind::W:
        if (m.is_nat() || m.is_pass()) return std::nullopt;
        break;
      case GameKind::E:
        if (m.is_nat() || m.is_erase() || (wrapped && m.is_pass())) return std::nullopt;
        break;
      case GameKind::Bt:
        if (m.is_nat() || m.is_pass() || m.is_bt()) return std::nullopt;
        break;
      case GameKind::M:
        if (m.is_row() || (wrapped && m.is_pass())) return std::nullopt;
        break;
    }
    if (dn > 0 && m.is_pass()) return "pass after the delay bound";
    return "move outside the game's alphabet: " + to_string(m);
  };

  // Product exploration over representative digits.
  Product P;
  std::map<std::tuple<std::uint32_t, State, std::uint64_t>, std::uint32_t> index;
  auto intern = [&](std::uint32_t q, State a, std::uint64_t phi) -> std::uint32_t {
    auto [it, fresh] = index.try_emplace({q, a, phi}, static_cast<std::uint32_t>(P.q.size()));
    if (fresh) {
      P.q.push_back(q);
      P.a.push_back(a);
      P.phi.push_back(phi);
      P.adj.emplace_back();
      P.parent.emplace_back(it->second, PEdge{});
      if (P.q.size() > 200000)
        throw GameError(ErrKind::Overflow, "legality_check_exact: product too large");
    }
    return it->second;
  };
  const std::uint32_t root = intern(tau.initial, G.domain.initial, 0);
  std::queue<std::uint32_t> work;
  work.push(root);
  std::vector<bool> expanded;
  while (!work.empty()) {
    const std::uint32_t u = work.front();
    work.pop();
    if (u < expanded.size() && expanded[u]) continue;
    if (expanded.size() <= u) expanded.resize(u + 1, false);
    expanded[u] = true;
    const std::uint32_t q = P.q[u];
    const State a = P.a[u];
    const std::uint64_t phi = P.phi[u];
    std::set<Digit> digits;
    for (const auto& [d, e] : tau.nodes[q].edges) digits.insert(d);
    for (const auto& [d, t] : G.domain.trans[a].edges) digits.insert(d);
    Digit fresh = 0;
    while (digits.count(fresh)) ++fresh;
    digits.insert(fresh);
    for (Digit d : digits) {
      const MealyEdge& e = tau.edge(q, d);
      const Move m = e.emit(d);
      const State a2 = G.domain.step(a, d);
      if (!viable[a2]) continue;  // no completion of x inside the domain
      if (auto err = positional(phi, m)) {
        Transcript w = stem_to(P, u);
        w.push_back({d, m});
        rep.verdict = LegalityReport::Verdict::Illegal;
        rep.finite_witness = std::move(w);
        rep.detail = *err;
        return rep;
      }
      const bool known = index.count({e.next, a2, std::min(phi + 1, dn)}) != 0;
      const std::uint32_t v = intern(e.next, a2, std::min(phi + 1, dn));
      P.adj[u].push_back({v, d, m});
      if (!known) {
        P.parent[v] = {u, PEdge{v, d, m}};
        work.push(v);
      }
    }
  }

  const std::uint32_t n = static_cast<std::uint32_t>(P.q.size());
  auto pr = [&](std::uint32_t u) { return G.domain.priority[P.a[u]]; };

  // Safety-only shapes are settled by the exploration above.
  const bool w_like = sh.kind == GameKind::W || (sh.kind == GameKind::L && wrapped);
  const bool safety_only = (sh.kind == GameKind::L && !wrapped) || sh.kind == GameKind::KLip;
  if (safety_only) {
    rep.verdict = LegalityReport::Verdict::Legal;
    rep.depth = n;
    return rep;
  }

  std::vector<std::vector<graph::Node>> full(n);
  for (std::uint32_t u = 0; u < n; ++u)
    for (const PEdge& e : P.adj[u]) full[u].push_back(e.to);

  std::set<std::uint64_t> evens;
  for (std::uint32_t u = 0; u < n; ++u)
    if (pr(u) % 2 == 0) evens.insert(pr(u));

  for (std::uint64_t p : evens) {
    std::vector<bool> active(n, false);
    for (std::uint32_t u = 0; u < n; ++u) active[u] = pr(u) >= p;
    auto in_active = [&](std::uint32_t u) { return active[u]; };

    if (w_like || sh.kind == GameKind::Bt || sh.kind == GameKind::M) {
      // Cycles made only of moves that discharge no liveness obligation.
      std::function<bool(const PEdge&)> idle;
      std::string what;
      if (w_like) {
        idle = [](const PEdge& e) { return e.m.is_pass(); };
        what = "a reachable cycle of passes only";
      } else if (sh.kind == GameKind::Bt) {
        idle = [](const PEdge& e) { return !e.m.is_nat(); };
        what = "a reachable cycle emitting no digit";
      } else {
        idle = [](const PEdge& e) { return !writes_row(e.m); };
        what = "a reachable cycle writing to no row";
      }
      std::vector<std::vector<graph::Node>> sub(n);
      for (std::uint32_t u = 0; u < n; ++u)
        if (active[u])
          for (const PEdge& e : P.adj[u])
            if (active[e.to] && idle(e)) sub[u].push_back(e.to);
      const auto scc = graph::scc_decompose(sub, active);
      std::vector<bool> comp_has_p(scc.count, false);
      for (std::uint32_t u = 0; u < n; ++u)
        if (active[u] && scc.comp[u] >= 0 && pr(u) == p) comp_has_p[scc.comp[u]] = true;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (!active[v] || scc.comp[v] < 0 || pr(v) != p) continue;
        const int c = scc.comp[v];
        if (!scc.has_cycle[c] || !comp_has_p[c]) continue;
        auto same_comp = [&](std::uint32_t u) { return active[u] && scc.comp[u] == c; };
        auto cyc = find_cycle_through(P, v, same_comp,
                                      [&](const PEdge& e) { return idle(e); });
        if (cyc) return illegal_lasso(P, v, *cyc, what);
      }
    }

    if (sh.kind == GameKind::Bt || sh.kind == GameKind::M) {
      // Cycles through a forbidden or second-row edge inside one component.
      const auto scc = graph::scc_decompose(full, active);
      for (int c = 0; c < scc.count; ++c) {
        std::uint32_t pnode = n;
        for (std::uint32_t u = 0; u < n; ++u)
          if (active[u] && scc.comp[u] == c && pr(u) == p) {
            pnode = u;
            break;
          }
        if (pnode == n) continue;
        auto same_comp = [&](std::uint32_t u) { return active[u] && scc.comp[u] == c; };
        auto any_edge = [](const PEdge&) { return true; };
        if (sh.kind == GameKind::Bt) {
          for (std::uint32_t u = 0; u < n; ++u) {
            if (!same_comp(u)) continue;
            for (const PEdge& e : P.adj[u]) {
              if (!same_comp(e.to) || !e.m.is_bt()) continue;
              auto p1 = find_path(P, pnode, u, same_comp, any_edge);
              auto p2 = find_path(P, e.to, pnode, same_comp, any_edge);
              if (!p1 || !p2) continue;
              std::vector<PEdge> cyc = *p1;
              cyc.push_back(e);
              cyc.insert(cyc.end(), p2->begin(), p2->end());
              return illegal_lasso(P, pnode, cyc, "a reachable cycle containing a back-track");
            }
          }
        } else {
          // Two distinct written rows inside one strongly connected piece.
          std::optional<std::pair<std::uint32_t, PEdge>> first;
          for (std::uint32_t u = 0; u < n && !rep.lasso_witness; ++u) {
            if (!same_comp(u)) continue;
            for (const PEdge& e : P.adj[u]) {
              if (!same_comp(e.to) || !writes_row(e.m)) continue;
              if (!first) {
                first = {u, e};
              } else if (first->second.m.row != e.m.row) {
                auto p1 = find_path(P, pnode, first->first, same_comp, any_edge);
                auto p2 = find_path(P, first->second.to, u, same_comp, any_edge);
                auto p3 = find_path(P, e.to, pnode, same_comp, any_edge);
                if (!p1 || !p2 || !p3) continue;
                std::vector<PEdge> cyc = *p1;
                cyc.push_back(first->second);
                cyc.insert(cyc.end(), p2->begin(), p2->end());
                cyc.push_back(e);
                cyc.insert(cyc.end(), p3->begin(), p3->end());
                return illegal_lasso(P, pnode, cyc,
                                     "a reachable cycle writing to two distinct rows");
              }
            }
          }
        }
      }
    }

    if (sh.kind == GameKind::E) {
      // A closed walk through a minimal-even-priority node whose erase count
      // matches or exceeds its digit count.
      const auto scc = graph::scc_decompose(full, active);
      for (int c = 0; c < scc.count; ++c) {
        std::vector<std::uint32_t> members;
        std::uint32_t pnode = n;
        for (std::uint32_t u = 0; u < n; ++u)
          if (active[u] && scc.comp[u] == c) {
            members.push_back(u);
            if (pnode == n && pr(u) == p) pnode = u;
          }
        if (pnode == n || members.empty()) continue;
        auto same_comp = [&](std::uint32_t u) { return active[u] && scc.comp[u] == c; };
        auto any_edge = [](const PEdge&) { return true; };
        std::vector<std::uint32_t> local(n, 0);
        for (std::uint32_t i = 0; i < members.size(); ++i) local[members[i]] = i;
        const std::size_t s = members.size();
        // Negative-cycle sweep, all-zero source.
        std::vector<std::int64_t> dist(s, 0);
        std::vector<std::pair<std::uint32_t, PEdge>> pred(s, {n, PEdge{}});
        std::uint32_t bad = n;
        for (std::size_t round = 0; round <= s && bad == n; ++round) {
          bool changed = false;
          for (std::uint32_t u : members) {
            for (const PEdge& e : P.adj[u]) {
              if (!same_comp(e.to)) continue;
              const std::int64_t cand = dist[local[u]] + eraser_weight(e.m);
              if (cand < dist[local[e.to]]) {
                dist[local[e.to]] = cand;
                pred[local[e.to]] = {u, e};
                changed = true;
                if (round == s) bad = e.to;
              }
            }
          }
          if (!changed) break;
        }
        if (bad != n) {
          // Walk predecessors into the guaranteed negative cycle.
          std::uint32_t z = bad;
          for (std::size_t i = 0; i < s; ++i) z = pred[local[z]].first;
          std::vector<PEdge> cyc;
          std::uint32_t w = z;
          do {
            const auto& [u, e] = pred[local[w]];
            cyc.push_back(e);
            w = u;
          } while (w != z);
          std::reverse(cyc.begin(), cyc.end());
          std::int64_t wc = 0;
          for (const PEdge& e : cyc) wc += eraser_weight(e.m);
          auto p1 = find_path(P, pnode, z, same_comp, any_edge);
          auto p2 = find_path(P, z, pnode, same_comp, any_edge);
          if (p1 && p2) {
            std::int64_t detour = 0;
            for (const PEdge& e : *p1) detour += eraser_weight(e.m);
            for (const PEdge& e : *p2) detour += eraser_weight(e.m);
            std::uint64_t reps = 1;
            if (detour > 0)
              reps = static_cast<std::uint64_t>((detour + (-wc) - 1) / (-wc)) + 1;
            std::vector<PEdge> walk = *p1;
            for (std::uint64_t i = 0; i < reps; ++i)
              walk.insert(walk.end(), cyc.begin(), cyc.end());
            walk.insert(walk.end(), p2->begin(), p2->end());
            return illegal_lasso(P, pnode, walk,
                                 "a reachable cycle erasing at least as much as it writes");
          }
        } else {
          // No negative cycle: minimal-weight cycles through each p-node.
          for (std::uint32_t v : members) {
            if (pr(v) != p) continue;
            std::vector<std::int64_t> dv(s, std::numeric_limits<std::int64_t>::max() / 4);
            std::vector<std::pair<std::uint32_t, PEdge>> pv(s, {n, PEdge{}});
            dv[local[v]] = 0;
            for (std::size_t round = 0; round < s; ++round) {
              bool changed = false;
              for (std::uint32_t u : members) {
                if (dv[local[u]] >= std::numeric_limits<std::int64_t>::max() / 8) continue;
                for (const PEdge& e : P.adj[u]) {
                  if (!same_comp(e.to)) continue;
                  const std::int64_t cand = dv[local[u]] + eraser_weight(e.m);
                  if (cand < dv[local[e.to]]) {
                    dv[local[e.to]] = cand;
                    pv[local[e.to]] = {u, e};
                    changed = true;
                  }
                }
              }
              if (!changed) break;
            }
            for (std::uint32_t u : members) {
              for (const PEdge& e : P.adj[u]) {
                if (e.to != v || !same_comp(u)) continue;
                if (dv[local[u]] >= std::numeric_limits<std::int64_t>::max() / 8) continue;
                if (dv[local[u]] + eraser_weight(e.m) > 0) continue;
                std::vector<PEdge> cyc;
                std::uint32_t w = u;
                while (w != v) {
                  cyc.push_back(pv[local[w]].second);
                  w = pv[local[w]].first;
                }
                std::reverse(cyc.begin(), cyc.end());
                cyc.push_back(e);
                return illegal_lasso(P, v, cyc,
                                     "a reachable cycle erasing at least as much as it writes");
              }
            }
          }
        }
      }
    }
  }

  rep.verdict = LegalityReport::Verdict::Legal;
  rep.depth = n;
  return rep;
}

LegalityReport legality_check_sampled(const GameSpec& G, const IIStrategy& tau,
                                      std::uint64_t samples, std::uint64_t depth,
                                      std::uint64_t seed) {
  Rng rng(seed);
  LegalityReport rep;
  rep.depth = depth;
  for (std::uint64_t i = 0; i < samples; ++i) {
    UPStream x = rng.up_stream(6, 6, 5);
    bool inside = membership_up(G.domain, x) == Membership::In;
    for (int tries = 0; !inside && tries < 16; ++tries) {
      x = rng.up_stream(6, 6, 5);
      inside = membership_up(G.domain, x) == Membership::In;
    }
    if (!inside) continue;
    const RunResult r = run_to_depth(G, StreamView::of(x), tau, depth);
    if (r.violated) {
      rep.verdict = LegalityReport::Verdict::Illegal;
      rep.finite_witness = r.transcript;
      rep.detail = r.violation_reason;
      return rep;
    }
    try {
      const LassoRun run = exact_run(tau, x);
      LassoContext ctx;
      ctx.input = &x;
      if (G.up_verdict(run, ctx) == RuleVerdict::OutRules) {
        rep.verdict = LegalityReport::Verdict::Illegal;
        rep.lasso_witness = run;
        rep.detail = "lasso verdict: outside the rules";
        return rep;
      }
    } catch (const GameError& e) {
      if (e.kind() != ErrKind::Undetermined && e.kind() != ErrKind::Overflow) throw;
    }
  }
  rep.verdict = LegalityReport::Verdict::UnknownAtDepth;
  rep.detail = "no violation found";
  return rep;
}

}  // namespace rgames
