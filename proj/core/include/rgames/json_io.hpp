#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rgames/composite.hpp"
#include "rgames/degree.hpp"
#include "rgames/engine.hpp"

namespace rgames {

// Readers throw GameError(Parse) on malformed input; writers emit the
// canonical form (sorted keys, shortest stream representation), so equal
// values serialize to identical bytes.

using Json = nlohmann::json;

Json to_json(const UPStream& x);
UPStream stream_from_json(const Json& j);

Json to_json(const DetOmegaAutomaton& a);
DetOmegaAutomaton automaton_from_json(const Json& j);

Json to_json(const Move& m);
Move move_from_json(const Json& j);

Json transcript_to_json(const std::vector<TranscriptEntry>& t);
std::vector<TranscriptEntry> transcript_from_json(const Json& j);

/// Base-game selector: kind plus the parameters the factory takes.
struct GameConfig {
  GameKind kind = GameKind::W;
  std::uint64_t k = 0;
  std::optional<DetOmegaAutomaton> domain;
};
Json to_json(const GameConfig& c);
GameConfig game_config_from_json(const Json& j);
GameSpec make_game(const GameConfig& c);

Json to_json(const MealyStrategy& m);
MealyStrategy mealy_from_json(const Json& j);

Json to_json(const ControlSet& c);
ControlSet control_set_from_json(const Json& j);

Json to_json(const ControlSchedule& s);
ControlSchedule schedule_from_json(const Json& j);

/// File form of a row schema: explicit rows with finite-state or constant
/// content over a schedule; the tail is always the schedule's default.
struct CompositeFile {
  CompositeStrategy schema;
  ControlSchedule controls;
};
Json composite_to_json(const CompositeStrategy& tau, const ControlSchedule& controls);
CompositeFile composite_from_json(const Json& j);

/// Serializable piece content: exactly one of the two forms is set.
struct PieceView {
  std::optional<MealyStrategy> mealy;
  std::optional<UPStream> constant;

  IIStrategyPtr strategy() const;
};
struct PiecewiseFile {
  PiecewiseSpec spec;
  std::vector<PieceView> views;  // views[k] backs spec.pieces[k].piece
};
Json piecewise_to_json(const PiecewiseSpec& spec, const std::vector<PieceView>& views);
PiecewiseFile piecewise_from_json(const Json& j);

/// Successor-set config: {"base": file, "controls": file, "kind": ...};
/// the referenced automaton and schedule files resolve relative to dir.
SuccessorSet successor_from_json(const Json& j, const std::filesystem::path& dir);

Json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace rgames
