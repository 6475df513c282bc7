#include "egin/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace egin {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_categories(std::string_view text, std::vector<CategoryId>& out) {
  out.clear();
  if (text.empty()) return false;
  for (auto part : split(text, ',')) {
    CategoryId c = 0;
    if (!parse_number(part, c)) return false;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return true;
}

void write_categories(std::ostream& out, const std::vector<CategoryId>& cats) {
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (i) out << ',';
    out << cats[i];
  }
}

bool parse_log_line(std::string_view line, EntityId& user, BehaviorEvent& ev) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = split(line, '\t');
  if (fields.size() != 5) return false;
  if (!parse_number(fields[0], user)) return false;
  if (fields[1] == "C") {
    ev.kind = EventKind::Click;
  } else if (fields[1] == "Q") {
    ev.kind = EventKind::Query;
  } else {
    return false;
  }
  if (!parse_number(fields[2], ev.entity_id)) return false;
  if (!parse_number(fields[3], ev.timestamp) || ev.timestamp < 0) return false;
  return parse_categories(fields[4], ev.categories);
}

void write_event(std::ostream& out, const BehaviorEvent& ev) {
  out << ev.entity_id << ':' << ev.timestamp << ':';
  write_categories(out, ev.categories);
}

BehaviorEvent parse_event(std::string_view text, EventKind kind) {
  const auto parts = split(text, ':');
  BehaviorEvent ev;
  ev.kind = kind;
  if (parts.size() != 3 || !parse_number(parts[0], ev.entity_id) ||
      !parse_number(parts[1], ev.timestamp) || ev.timestamp < 0 ||
      !parse_categories(parts[2], ev.categories)) {
    throw ParseError("malformed event '" + std::string(text) + "'");
  }
  return ev;
}

void write_sequence(std::ostream& out, const std::vector<BehaviorEvent>& seq) {
  if (seq.empty()) {
    out << '-';
    return;
  }
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out << '|';
    write_event(out, seq[i]);
  }
}

std::vector<BehaviorEvent> parse_sequence(std::string_view text, EventKind kind) {
  std::vector<BehaviorEvent> seq;
  if (text == "-") return seq;
  for (auto part : split(text, '|')) seq.push_back(parse_event(part, kind));
  return seq;
}

template <typename It>
std::vector<BehaviorEvent> tail(It first, It last, std::size_t max_len) {
  const auto n = static_cast<std::size_t>(std::distance(first, last));
  if (n > max_len) std::advance(first, n - max_len);
  return {first, last};
}

}  // namespace

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::Item:
      return "item";
    case EntityType::Query:
      return "query";
    case EntityType::Bin:
      return "bin";
    case EntityType::Position:
      return "position";
  }
  return "unknown";
}

EntityType entity_type_from_string(std::string_view text) {
  if (text == "item") return EntityType::Item;
  if (text == "query") return EntityType::Query;
  if (text == "bin") return EntityType::Bin;
  if (text == "position") return EntityType::Position;
  throw ParseError("unknown entity type '" + std::string(text) + "'");
}

bool event_less(const BehaviorEvent& a, const BehaviorEvent& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.entity_id < b.entity_id;
}

bool categories_intersect(const std::vector<CategoryId>& a, const std::vector<CategoryId>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

void canonicalize(BehaviorSequence& seq) {
  std::stable_sort(seq.events.begin(), seq.events.end(), event_less);
}

ParsedLog parse_log(std::istream& in) {
  ParsedLog result;
  std::map<EntityId, BehaviorSequence> by_user;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++result.stats.lines;
    EntityId user = 0;
    BehaviorEvent ev;
    if (!parse_log_line(line, user, ev)) {
      ++result.stats.malformed;
      continue;
    }
    auto& seq = by_user[user];
    seq.user_id = user;
    seq.events.push_back(std::move(ev));
  }
  if (result.stats.malformed * 10 > result.stats.lines) {
    throw ParseError("behavior log rejected: " + std::to_string(result.stats.malformed) + " of " +
                     std::to_string(result.stats.lines) + " lines malformed");
  }
  result.sequences.reserve(by_user.size());
  for (auto& [user, seq] : by_user) {
    canonicalize(seq);
    result.sequences.push_back(std::move(seq));
  }
  return result;
}

ParsedLog parse_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read behavior log '" + path.string() + "'");
  return parse_log(in);
}

void write_log(std::ostream& out, const std::vector<BehaviorSequence>& sequences) {
  for (const auto& seq : sequences) {
    for (const auto& ev : seq.events) {
      out << seq.user_id << '\t' << (ev.kind == EventKind::Click ? 'C' : 'Q') << '\t'
          << ev.entity_id << '\t' << ev.timestamp << '\t';
      write_categories(out, ev.categories);
      out << '\n';
    }
  }
}

void write_log(const std::filesystem::path& path, const std::vector<BehaviorSequence>& sequences) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write behavior log '" + path.string() + "'");
  write_log(out, sequences);
}

SplitSequences split_sequences(const BehaviorSequence& seq, std::size_t max_click_len,
                               std::size_t max_query_len) {
  std::vector<BehaviorEvent> clicks;
  std::vector<BehaviorEvent> queries;
  for (const auto& ev : seq.events) {
    (ev.kind == EventKind::Click ? clicks : queries).push_back(ev);
  }
  return {tail(clicks.begin(), clicks.end(), max_click_len),
          tail(queries.begin(), queries.end(), max_query_len)};
}

std::vector<BehaviorEvent> derive_seeds_seq(const std::vector<BehaviorEvent>& click_seq,
                                            const BehaviorEvent& current_query) {
  std::vector<BehaviorEvent> seeds;
  for (const auto& click : click_seq) {
    if (categories_intersect(click.categories, current_query.categories)) seeds.push_back(click);
  }
  return seeds;
}

bool assemble_sample(const BehaviorSequence& seq, std::size_t target_index,
                     const SequenceLimits& limits, TrainingSample& out) {
  if (target_index >= seq.events.size() || seq.events[target_index].kind != EventKind::Click) {
    throw ContractViolation("assemble_sample: target index does not name a click");
  }
  const auto& target = seq.events[target_index];
  BehaviorSequence history{seq.user_id, {}};
  for (std::size_t i = 0; i < target_index; ++i) {
    if (seq.events[i].timestamp < target.timestamp) history.events.push_back(seq.events[i]);
  }
  auto parts = split_sequences(history, history.events.size(), history.events.size());
  if (parts.queries.empty()) return false;

  out = TrainingSample{};
  out.user_id = seq.user_id;
  out.target_item = target;
  out.current_query = parts.queries.back();
  if (!limits.include_current_query) parts.queries.pop_back();
  out.click_seq = tail(parts.clicks.begin(), parts.clicks.end(), limits.max_click_len);
  out.query_seq = tail(parts.queries.begin(), parts.queries.end(), limits.max_query_len);
  out.seeds_seq = derive_seeds_seq(out.click_seq, out.current_query);
  return true;
}

std::string format_sample(const TrainingSample& s) {
  std::ostringstream out;
  out << s.user_id << '\t' << s.label << '\t';
  write_event(out, s.target_item);
  out << '\t';
  write_event(out, s.current_query);
  out << '\t';
  write_sequence(out, s.click_seq);
  out << '\t';
  write_sequence(out, s.query_seq);
  out << '\t';
  write_sequence(out, s.seeds_seq);
  out << '\t';
  if (s.other_features.empty()) {
    out << '-';
  } else {
    out << std::setprecision(17);
    for (std::size_t i = 0; i < s.other_features.size(); ++i) {
      if (i) out << ',';
      out << s.other_features[i];
    }
  }
  return out.str();
}

TrainingSample parse_sample(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = split(line, '\t');
  if (fields.size() != 8) {
    throw ParseError("labeled sample must have 8 tab-separated fields, got " +
                     std::to_string(fields.size()));
  }
  TrainingSample s;
  if (!parse_number(fields[0], s.user_id)) throw ParseError("bad user_id in labeled sample");
  if (fields[1] == "1") {
    s.label = 1;
  } else if (fields[1] == "0") {
    s.label = 0;
  } else {
    throw ParseError("label must be 0 or 1");
  }
  s.target_item = parse_event(fields[2], EventKind::Click);
  s.current_query = parse_event(fields[3], EventKind::Query);
  s.click_seq = parse_sequence(fields[4], EventKind::Click);
  s.query_seq = parse_sequence(fields[5], EventKind::Query);
  s.seeds_seq = parse_sequence(fields[6], EventKind::Click);
  if (fields[7] != "-") {
    for (auto part : split(fields[7], ',')) {
      double v = 0.0;
      if (!parse_number(part, v)) throw ParseError("bad other_features value '" + std::string(part) + "'");
      s.other_features.push_back(v);
    }
  }
  for (const auto& ev : s.click_seq) {
    if (ev.timestamp >= s.target_item.timestamp) {
      throw ParseError("labeled sample history does not precede its target");
    }
  }
  return s;
}

void write_samples(std::ostream& out, const std::vector<TrainingSample>& samples) {
  for (const auto& s : samples) out << format_sample(s) << '\n';
}

void write_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write samples '" + path.string() + "'");
  write_samples(out, samples);
}

std::vector<TrainingSample> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read samples '" + path.string() + "'");
  std::vector<TrainingSample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      samples.push_back(parse_sample(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return samples;
}

}  // namespace egin
