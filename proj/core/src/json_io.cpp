#include "rgames/json_io.hpp"

#include <fstream>
#include <string>

#include "rgames/errors.hpp"
#include "rgames/strategy.hpp"

namespace rgames {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw GameError(ErrKind::Parse, what);
}

// Runs a reader body and converts library exceptions into Parse errors
// tagged with the record kind being read.
template <class F>
auto reading(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const GameError&) {
    throw;
  } catch (const std::exception& e) {
    parse_fail(std::string(what) + ": " + e.what());
  }
}

std::uint64_t u64_from_json(const Json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  parse_fail(std::string(what) + " must be a nonnegative integer");
}

FinSeq digits_from_json(const Json& j) {
  if (!j.is_array()) parse_fail("digit list must be an array");
  FinSeq s;
  s.reserve(j.size());
  for (const Json& d : j) s.push_back(u64_from_json(d, "digit"));
  return s;
}

// Edge endpoint columns accept a state number or "_" for the otherwise
// edge; this reads either and reports which one it saw.
struct EdgeKey {
  bool otherwise = false;
  Digit digit = 0;
};

EdgeKey edge_key_from_json(const Json& j) {
  EdgeKey k;
  if (j.is_string()) {
    if (j.get<std::string>() != "_") parse_fail("edge label must be a digit or \"_\"");
    k.otherwise = true;
  } else {
    k.digit = u64_from_json(j, "edge label");
  }
  return k;
}

std::uint32_t state_from_json(const Json& j, std::size_t bound, const char* what) {
  const std::uint64_t q = u64_from_json(j, what);
  if (q >= bound) parse_fail(std::string(what) + " " + std::to_string(q) + " out of range");
  return static_cast<std::uint32_t>(q);
}

CompositeStrategy assemble_schema(std::map<std::uint64_t, RowComponent> rows,
                                  const ControlSchedule& cs) {
  CompositeStrategy t;
  const std::uint64_t top = rows.empty() ? 0 : rows.rbegin()->first + 1;
  t.rows = std::move(rows);
  t.tail = make_default_tail(cs);
  const OrbitShape rec = cs.recurrence();
  t.row_bound = std::max(top, 2 * rec.tail);
  t.tail_cycle = std::max<std::uint64_t>(rec.cycle, 1);
  return t;
}

Json row_content_to_json(const RowComponent& rc, std::uint64_t n) {
  Json j = Json::object();
  if (rc.constant)
    j["constant"] = to_json(*rc.constant);
  else if (rc.mealy)
    j["mealy"] = to_json(*rc.mealy);
  else
    throw GameError(ErrKind::InvalidArgument,
                    "row " + std::to_string(n) + " has no serializable view");
  return j;
}

RowComponent row_content_from_json(const Json& j) {
  const bool has_const = j.contains("constant");
  const bool has_mealy = j.contains("mealy");
  if (has_const == has_mealy) parse_fail("row content needs exactly one of constant/mealy");
  if (has_const) return row_component(stream_from_json(j.at("constant")));
  return row_component(mealy_from_json(j.at("mealy")));
}

}  // namespace

Json to_json(const UPStream& x) {
  return Json{{"prefix", x.prefix()}, {"period", x.period()}};
}

UPStream stream_from_json(const Json& j) {
  return reading("stream", [&] {
    if (!j.is_object()) parse_fail("stream must be an object");
    const FinSeq period = digits_from_json(j.at("period"));
    if (period.empty()) parse_fail("stream period must be nonempty");
    return UPStream(digits_from_json(j.at("prefix")), period);
  });
}

Json to_json(const DetOmegaAutomaton& a) {
  Json edges = Json::array();
  for (std::size_t q = 0; q < a.trans.size(); ++q) {
    for (const auto& [d, t] : a.trans[q].edges) edges.push_back({q, d, t});
    edges.push_back({q, "_", a.trans[q].otherwise});
  }
  return Json{{"states", a.trans.size()},
              {"initial", a.initial},
              {"edges", std::move(edges)},
              {"priority", a.priority}};
}

DetOmegaAutomaton automaton_from_json(const Json& j) {
  return reading("automaton", [&] {
    if (!j.is_object()) parse_fail("automaton must be an object");
    DetOmegaAutomaton a;
    const std::size_t n = u64_from_json(j.at("states"), "state count");
    if (n == 0) parse_fail("automaton needs at least one state");
    a.trans.resize(n);
    a.initial = state_from_json(j.at("initial"), n, "initial state");
    const Json& prio = j.at("priority");
    if (!prio.is_array() || prio.size() != n)
      parse_fail("priority must list one value per state");
    a.priority.clear();
    for (const Json& p : prio) {
      a.priority.push_back(u64_from_json(p, "priority"));
    }
    for (const Json& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) parse_fail("edges must be [state,label,state] triples");
      const std::uint32_t src = state_from_json(e[0], n, "edge source");
      const std::uint32_t dst = state_from_json(e[2], n, "edge target");
      const EdgeKey k = edge_key_from_json(e[1]);
      if (k.otherwise)
        a.trans[src].otherwise = dst;
      else
        a.trans[src].edges[k.digit] = dst;
    }
    return a;
  });
}

Json to_json(const Move& m) {
  switch (m.kind) {
    case Move::Kind::Nat:
      return Json{{"nat", m.nat}};
    case Move::Kind::Symbol:
      switch (m.sym) {
        case Sym::Pass: return Json{{"sym", "P"}};
        case Sym::Erase: return Json{{"sym", "E"}};
        case Sym::Bt: return Json{{"sym", "BT"}};
      }
      break;
    case Move::Kind::Row:
      if (m.inner_pass) return Json{{"row", m.row}, {"pass", true}};
      return Json{{"row", m.row}, {"nat", m.nat}};
  }
  throw GameError(ErrKind::InvalidArgument, "unencodable move");
}

Move move_from_json(const Json& j) {
  return reading("move", [&] {
    if (!j.is_object()) parse_fail("move must be an object");
    if (j.contains("row")) {
      const std::uint64_t r = u64_from_json(j.at("row"), "move row");
      if (j.contains("pass")) {
        if (j.at("pass") != Json(true)) parse_fail("row pass flag must be true");
        return Move::row_move_pass(r);
      }
      return Move::row_move_nat(r, u64_from_json(j.at("nat"), "move digit"));
    }
    if (j.contains("sym")) {
      const std::string s = j.at("sym").get<std::string>();
      if (s == "P") return Move::pass();
      if (s == "E") return Move::erase();
      if (s == "BT") return Move::bt();
      parse_fail("unknown move symbol " + s);
    }
    if (j.contains("nat")) return Move::nat_move(u64_from_json(j.at("nat"), "move digit"));
    parse_fail("move needs nat, sym, or row");
  });
}

Json transcript_to_json(const std::vector<TranscriptEntry>& t) {
  Json j = Json::array();
  for (const TranscriptEntry& e : t) {
    j.push_back({"I", e.i});
    j.push_back({"II", to_json(e.ii)});
  }
  return j;
}

std::vector<TranscriptEntry> transcript_from_json(const Json& j) {
  return reading("transcript", [&] {
    if (!j.is_array() || j.size() % 2 != 0)
      parse_fail("transcript must alternate I and II entries");
    std::vector<TranscriptEntry> t;
    for (std::size_t i = 0; i < j.size(); i += 2) {
      const Json& ji = j[i];
      const Json& jii = j[i + 1];
      if (!ji.is_array() || ji.size() != 2 || ji[0] != Json("I"))
        parse_fail("expected [\"I\", digit] at entry " + std::to_string(i));
      if (!jii.is_array() || jii.size() != 2 || jii[0] != Json("II"))
        parse_fail("expected [\"II\", move] at entry " + std::to_string(i + 1));
      TranscriptEntry e;
      e.i = u64_from_json(ji[1], "player I digit");
      e.ii = move_from_json(jii[1]);
      t.push_back(e);
    }
    return t;
  });
}

namespace {

const std::map<std::string, GameKind>& kind_names() {
  static const std::map<std::string, GameKind> m = {
      {"L", GameKind::L}, {"W", GameKind::W},   {"KLip", GameKind::KLip},
      {"E", GameKind::E}, {"Bt", GameKind::Bt}, {"M", GameKind::M}};
  return m;
}

}  // namespace

Json to_json(const GameConfig& c) {
  Json j = Json::object();
  for (const auto& [name, kind] : kind_names())
    if (kind == c.kind) j["kind"] = name;
  if (c.kind == GameKind::KLip) j["k"] = c.k;
  if (c.domain) j["domain"] = to_json(*c.domain);
  return j;
}

GameConfig game_config_from_json(const Json& j) {
  return reading("game config", [&] {
    if (!j.is_object()) parse_fail("game config must be an object");
    GameConfig c;
    const std::string kind = j.at("kind").get<std::string>();
    auto it = kind_names().find(kind);
    if (it == kind_names().end()) parse_fail("unknown game kind " + kind);
    c.kind = it->second;
    if (j.contains("k")) c.k = u64_from_json(j.at("k"), "k");
    if (j.contains("domain")) c.domain = automaton_from_json(j.at("domain"));
    return c;
  });
}

GameSpec make_game(const GameConfig& c) {
  return make_base_game(c.kind, c.k, c.domain ? *c.domain : full_space());
}

namespace {

// Mealy step rows are [state, label, next, move]; the move column takes the
// transcript encoding plus {"echo":true} for copy-the-input edges.
Json mealy_edge_out_to_json(const MealyEdge& e) {
  if (e.echo) return Json{{"echo", true}};
  return to_json(e.out);
}

MealyEdge mealy_edge_from_json(const Json& next, const Json& move, std::size_t states) {
  MealyEdge e;
  e.next = state_from_json(next, states, "step target");
  if (move.is_object() && move.contains("echo")) {
    if (move.at("echo") != Json(true)) parse_fail("echo flag must be true");
    e.echo = true;
  } else {
    e.out = move_from_json(move);
  }
  return e;
}

}  // namespace

Json to_json(const MealyStrategy& m) {
  Json steps = Json::array();
  for (std::size_t q = 0; q < m.nodes.size(); ++q) {
    for (const auto& [d, e] : m.nodes[q].edges)
      steps.push_back({q, d, e.next, mealy_edge_out_to_json(e)});
    const MealyEdge& oe = m.nodes[q].otherwise;
    steps.push_back({q, "_", oe.next, mealy_edge_out_to_json(oe)});
  }
  return Json{{"states", m.nodes.size()}, {"initial", m.initial}, {"step", std::move(steps)}};
}

MealyStrategy mealy_from_json(const Json& j) {
  return reading("mealy strategy", [&] {
    if (!j.is_object()) parse_fail("mealy strategy must be an object");
    MealyStrategy m;
    const std::size_t n = u64_from_json(j.at("states"), "state count");
    if (n == 0) parse_fail("mealy strategy needs at least one state");
    m.nodes.resize(n);
    m.initial = state_from_json(j.at("initial"), n, "initial state");
    for (const Json& s : j.at("step")) {
      if (!s.is_array() || s.size() != 4)
        parse_fail("steps must be [state,label,next,move] rows");
      const std::uint32_t src = state_from_json(s[0], n, "step source");
      const EdgeKey k = edge_key_from_json(s[1]);
      const MealyEdge e = mealy_edge_from_json(s[2], s[3], n);
      if (k.otherwise)
        m.nodes[src].otherwise = e;
      else
        m.nodes[src].edges[k.digit] = e;
    }
    m.validate();
    return m;
  });
}

namespace {

const std::map<std::string, RankTag>& rank_names() {
  static const std::map<std::string, RankTag> m = {
      {"closed", RankTag::Closed}, {"pi02", RankTag::Pi02}, {"user", RankTag::User}};
  return m;
}

}  // namespace

Json to_json(const ControlSet& c) {
  Json j = Json{{"automaton", to_json(c.automaton)}, {"name", c.name}};
  for (const auto& [name, tag] : rank_names())
    if (tag == c.declared_rank) j["rank"] = name;
  return j;
}

ControlSet control_set_from_json(const Json& j) {
  return reading("control set", [&] {
    if (!j.is_object()) parse_fail("control set must be an object");
    ControlSet c;
    c.automaton = automaton_from_json(j.at("automaton"));
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    if (j.contains("rank")) {
      const std::string rank = j.at("rank").get<std::string>();
      auto it = rank_names().find(rank);
      if (it == rank_names().end()) parse_fail("unknown rank tag " + rank);
      c.declared_rank = it->second;
    }
    c.validate_shape();
    return c;
  });
}

Json to_json(const ControlSchedule& s) {
  Json sets = Json::array();
  for (const ControlSet& c : s.sets) sets.push_back(to_json(c));
  return Json{{"tail", s.tail == ControlSchedule::Tail::Cycle ? "cycle" : "repeat"},
              {"sets", std::move(sets)}};
}

ControlSchedule schedule_from_json(const Json& j) {
  return reading("control schedule", [&] {
    if (!j.is_object()) parse_fail("control schedule must be an object");
    ControlSchedule s;
    const std::string tail = j.at("tail").get<std::string>();
    if (tail == "cycle")
      s.tail = ControlSchedule::Tail::Cycle;
    else if (tail == "repeat")
      s.tail = ControlSchedule::Tail::RepeatLast;
    else
      parse_fail("schedule tail must be repeat or cycle");
    for (const Json& c : j.at("sets")) s.sets.push_back(control_set_from_json(c));
    s.validate();
    return s;
  });
}

Json composite_to_json(const CompositeStrategy& tau, const ControlSchedule& controls) {
  Json rows = Json::array();
  for (const auto& [n, rc] : tau.rows) {
    Json row = row_content_to_json(rc, n);
    row["row"] = n;
    rows.push_back(std::move(row));
  }
  return Json{{"controls", to_json(controls)}, {"rows", std::move(rows)}};
}

CompositeFile composite_from_json(const Json& j) {
  return reading("composite strategy", [&] {
    if (!j.is_object()) parse_fail("composite strategy must be an object");
    CompositeFile f;
    f.controls = schedule_from_json(j.at("controls"));
    std::map<std::uint64_t, RowComponent> rows;
    for (const Json& r : j.at("rows")) {
      if (!r.is_object()) parse_fail("rows must be objects");
      const std::uint64_t n = u64_from_json(r.at("row"), "row index");
      if (rows.count(n)) parse_fail("duplicate row " + std::to_string(n));
      rows.emplace(n, row_content_from_json(r));
    }
    f.schema = assemble_schema(std::move(rows), f.controls);
    return f;
  });
}

IIStrategyPtr PieceView::strategy() const {
  if (constant) return const_strategy(*constant);
  if (mealy) return as_strategy(*mealy);
  throw GameError(ErrKind::InvalidArgument, "piece view holds no content");
}

Json piecewise_to_json(const PiecewiseSpec& spec, const std::vector<PieceView>& views) {
  if (views.size() != spec.pieces.size())
    throw GameError(ErrKind::InvalidArgument, "one piece view per piece required");
  Json pieces = Json::array();
  for (std::size_t k = 0; k < spec.pieces.size(); ++k) {
    Json p = Json::object();
    if (spec.pieces[k].region) p["region"] = to_json(*spec.pieces[k].region);
    if (spec.pieces[k].witness) p["witness"] = to_json(*spec.pieces[k].witness);
    const PieceView& v = views[k];
    if (v.constant)
      p["piece"] = Json{{"constant", to_json(*v.constant)}};
    else if (v.mealy)
      p["piece"] = Json{{"mealy", to_json(*v.mealy)}};
    else
      throw GameError(ErrKind::InvalidArgument,
                      "piece " + std::to_string(k) + " has no serializable view");
    pieces.push_back(std::move(p));
  }
  return Json{{"controls", to_json(spec.controls)}, {"pieces", std::move(pieces)}};
}

PiecewiseFile piecewise_from_json(const Json& j) {
  return reading("piecewise spec", [&] {
    if (!j.is_object()) parse_fail("piecewise spec must be an object");
    PiecewiseFile f;
    f.spec.controls = schedule_from_json(j.at("controls"));
    for (const Json& p : j.at("pieces")) {
      if (!p.is_object()) parse_fail("pieces must be objects");
      PiecewisePiece pc;
      PieceView v;
      if (p.contains("region")) pc.region = automaton_from_json(p.at("region"));
      if (p.contains("witness")) pc.witness = mealy_from_json(p.at("witness"));
      const Json& content = p.at("piece");
      const bool has_const = content.contains("constant");
      const bool has_mealy = content.contains("mealy");
      if (has_const == has_mealy) parse_fail("piece needs exactly one of constant/mealy");
      if (has_const)
        v.constant = stream_from_json(content.at("constant"));
      else
        v.mealy = mealy_from_json(content.at("mealy"));
      pc.piece = v.strategy();
      f.spec.pieces.push_back(std::move(pc));
      f.views.push_back(std::move(v));
    }
    return f;
  });
}

SuccessorSet successor_from_json(const Json& j, const std::filesystem::path& dir) {
  return reading("successor set", [&] {
    if (!j.is_object()) parse_fail("successor set must be an object");
    SuccessorSet s;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sigma")
      s.kind = SuccessorKind::Sigma;
    else if (kind == "pi")
      s.kind = SuccessorKind::Pi;
    else if (kind == "r")
      s.kind = SuccessorKind::R;
    else
      parse_fail("successor kind must be sigma, pi, or r");
    const auto ref = [&](const char* field) {
      return load_json_file(dir / j.at(field).get<std::string>());
    };
    s.base = automaton_from_json(ref("base"));
    s.controls = schedule_from_json(ref("controls"));
    return s;
  });
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GameError(ErrKind::Parse, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

void save_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw GameError(ErrKind::Parse, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace rgames
