/**
 * @file ingest.hpp
 * @brief Behavior events, per-user sequences and the unified training sample.
 *
 * Both the graph learner and the CTR network consume TrainingSample; nothing
 * downstream reads raw logs.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "egin/common.hpp"

namespace egin {

enum class EventKind : std::uint8_t { Click = 0, Query = 1 };

struct BehaviorEvent {
  EventKind kind = EventKind::Click;
  EntityId entity_id = 0;
  Timestamp timestamp = 0;
  std::vector<CategoryId> categories;  // sorted, unique, nonempty

  bool operator==(const BehaviorEvent&) const = default;
};

/// Orders by (timestamp, kind, entity_id).
bool event_less(const BehaviorEvent& a, const BehaviorEvent& b);

/// True when the two category sets share at least one id. Both must be sorted.
bool categories_intersect(const std::vector<CategoryId>& a, const std::vector<CategoryId>& b);

struct BehaviorSequence {
  EntityId user_id = 0;
  std::vector<BehaviorEvent> events;

  bool operator==(const BehaviorSequence&) const = default;
};

struct TrainingSample {
  EntityId user_id = 0;
  BehaviorEvent target_item;
  BehaviorEvent current_query;
  std::vector<BehaviorEvent> click_seq;
  std::vector<BehaviorEvent> query_seq;
  std::vector<BehaviorEvent> seeds_seq;
  std::vector<double> other_features;
  int label = 0;

  bool operator==(const TrainingSample&) const = default;
};

struct SequenceLimits {
  std::size_t max_click_len = 100;
  std::size_t max_query_len = 100;
  /// When false the current query is left out of query_seq.
  bool include_current_query = false;
};

struct SplitSequences {
  std::vector<BehaviorEvent> clicks;
  std::vector<BehaviorEvent> queries;
};

struct ParseStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
};

struct ParsedLog {
  std::vector<BehaviorSequence> sequences;  // ascending user_id
  ParseStats stats;
};

/// Parses the tab-separated behavior log. Malformed lines are skipped and
/// counted; more than 10% malformed is a hard ParseError.
ParsedLog parse_log(const std::filesystem::path& path);
ParsedLog parse_log(std::istream& in);

void write_log(std::ostream& out, const std::vector<BehaviorSequence>& sequences);
void write_log(const std::filesystem::path& path, const std::vector<BehaviorSequence>& sequences);

/// Sorts events in place into canonical order.
void canonicalize(BehaviorSequence& seq);

/// Partitions by kind preserving time order, keeping the most recent events
/// up to the given lengths.
SplitSequences split_sequences(const BehaviorSequence& seq, std::size_t max_click_len,
                               std::size_t max_query_len);

/// Clicks whose category set intersects the query's.
std::vector<BehaviorEvent> derive_seeds_seq(const std::vector<BehaviorEvent>& click_seq,
                                            const BehaviorEvent& current_query);

/// Builds the sample that predicts events[target_index] (a click) from the
/// events strictly before it. Returns false when no query precedes the target.
bool assemble_sample(const BehaviorSequence& seq, std::size_t target_index,
                     const SequenceLimits& limits, TrainingSample& out);

// Labeled-sample text format, one sample per line:
//   user_id \t label \t target \t query \t clicks \t queries \t seeds \t other
// event    := id:timestamp:cat,cat,...
// sequence := event|event|...   ("-" when empty)
// other    := comma-separated decimals ("-" when empty)
std::string format_sample(const TrainingSample& sample);
TrainingSample parse_sample(std::string_view line);

void write_samples(std::ostream& out, const std::vector<TrainingSample>& samples);
void write_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples);
std::vector<TrainingSample> read_samples(const std::filesystem::path& path);

}  // namespace egin
