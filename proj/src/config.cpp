#include "egin/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace egin {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_num(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError(std::string(key), "cannot parse '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(v) + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Key {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define EGIN_SIZE_KEY(name, member) \
  Key{name, [](RunConfig& c, std::string_view v) { c.member = parse_num<std::size_t>(name, v); }, \
      [](const RunConfig& c) { return std::to_string(c.member); }}
#define EGIN_INT_KEY(name, member) \
  Key{name, [](RunConfig& c, std::string_view v) { c.member = parse_num<std::int64_t>(name, v); }, \
      [](const RunConfig& c) { return std::to_string(c.member); }}
#define EGIN_DOUBLE_KEY(name, member) \
  Key{name, [](RunConfig& c, std::string_view v) { c.member = parse_num<double>(name, v); }, \
      [](const RunConfig& c) { return fmt(c.member); }}
#define EGIN_BOOL_KEY(name, member) \
  Key{name, [](RunConfig& c, std::string_view v) { c.member = parse_bool(name, v); }, \
      [](const RunConfig& c) { return fmt(c.member); }}

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = {
      Key{"seed",
          [](RunConfig& c, std::string_view v) { c.gen.seed = c.train.seed = parse_num<std::uint64_t>("seed", v); },
          [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      // synthetic data
      EGIN_SIZE_KEY("num_users", gen.num_users),
      EGIN_SIZE_KEY("num_items", gen.num_items),
      EGIN_SIZE_KEY("num_queries", gen.num_queries),
      EGIN_SIZE_KEY("num_categories", gen.num_categories),
      EGIN_SIZE_KEY("items_per_category", gen.items_per_category),
      EGIN_DOUBLE_KEY("session_gap_mean", gen.session_gap_mean),
      EGIN_DOUBLE_KEY("intra_category_click_prob", gen.intra_category_click_prob),
      EGIN_SIZE_KEY("seq_len_max", gen.seq_len_max),
      EGIN_SIZE_KEY("cluster_size", gen.cluster_size),
      EGIN_SIZE_KEY("interests_per_user", gen.interests_per_user),
      EGIN_SIZE_KEY("min_sessions", gen.min_sessions),
      EGIN_SIZE_KEY("max_sessions", gen.max_sessions),
      EGIN_SIZE_KEY("max_queries_per_session", gen.max_queries_per_session),
      EGIN_SIZE_KEY("max_clicks_per_query", gen.max_clicks_per_query),
      EGIN_DOUBLE_KEY("cluster_affinity", gen.cluster_affinity),
      EGIN_DOUBLE_KEY("explore_prob", gen.explore_prob),
      EGIN_DOUBLE_KEY("event_gap_mean", gen.event_gap_mean),
      EGIN_DOUBLE_KEY("extra_query_category_prob", gen.extra_query_category_prob),
      EGIN_SIZE_KEY("train_targets_per_user", gen.train_targets_per_user),
      // sequences
      EGIN_SIZE_KEY("max_click_len", train.limits.max_click_len),
      EGIN_SIZE_KEY("max_query_len", train.limits.max_query_len),
      EGIN_BOOL_KEY("include_current_query", train.limits.include_current_query),
      // graph
      EGIN_SIZE_KEY("window", train.edges.window),
      EGIN_INT_KEY("session_gap", train.edges.session_gap),
      EGIN_INT_KEY("q2i_timespan", train.edges.q2i_timespan),
      EGIN_DOUBLE_KEY("seeds_mix_rate", train.edges.seeds_mix_rate),
      EGIN_BOOL_KEY("symmetric_q2i_time", train.edges.symmetric_q2i_time),
      EGIN_BOOL_KEY("use_query", train.edges.use_query_edges),
      EGIN_SIZE_KEY("n_neg", train.n_neg),
      EGIN_SIZE_KEY("neg_queue_capacity", train.queue_capacity),
      EGIN_DOUBLE_KEY("subsample_threshold", train.subsample_threshold),
      // model
      EGIN_SIZE_KEY("dim", train.dim),
      Key{"hidden",
          [](RunConfig& c, std::string_view v) {
            c.train.hidden.clear();
            while (!v.empty()) {
              const auto comma = v.find(',');
              c.train.hidden.push_back(parse_num<std::size_t>("hidden", trim(v.substr(0, comma))));
              v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
            }
          },
          [](const RunConfig& c) {
            std::string out;
            for (std::size_t i = 0; i < c.train.hidden.size(); ++i) {
              if (i) out += ',';
              out += std::to_string(c.train.hidden[i]);
            }
            return out;
          }},
      EGIN_SIZE_KEY("top_k", train.top_k),
      EGIN_SIZE_KEY("num_bins", train.num_bins),
      EGIN_BOOL_KEY("use_pos_emb", train.use_pos_emb),
      EGIN_BOOL_KEY("freeze_graph", train.freeze_graph),
      // training
      EGIN_DOUBLE_KEY("alpha", train.alpha),
      EGIN_DOUBLE_KEY("beta", train.beta),
      EGIN_DOUBLE_KEY("gamma", train.gamma),
      EGIN_DOUBLE_KEY("lr_ctr", train.lr_ctr),
      EGIN_DOUBLE_KEY("lr_graph", train.lr_graph),
      Key{"optimizer_ctr",
          [](RunConfig& c, std::string_view v) { c.train.optimizer_ctr = optimizer_from_string(std::string(v)); },
          [](const RunConfig& c) { return to_string(c.train.optimizer_ctr); }},
      Key{"optimizer_graph",
          [](RunConfig& c, std::string_view v) { c.train.optimizer_graph = optimizer_from_string(std::string(v)); },
          [](const RunConfig& c) { return to_string(c.train.optimizer_graph); }},
      EGIN_SIZE_KEY("batch_size", train.batch_size),
      EGIN_SIZE_KEY("epochs", train.epochs),
      EGIN_BOOL_KEY("shuffle", train.shuffle),
      EGIN_SIZE_KEY("eval_every", train.eval_every),
  };
  return table;
}

#undef EGIN_SIZE_KEY
#undef EGIN_INT_KEY
#undef EGIN_DOUBLE_KEY
#undef EGIN_BOOL_KEY

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const auto& k : key_table()) {
    if (k.name == key) {
      k.set(*this, value);
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown key");
}

void RunConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(std::string(trim(assignment)), "expected key=value");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::validate() const {
  gen.validate();
  train.validate();
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& k : key_table()) out += k.name + " = " + k.get(*this) + '\n';
  return out;
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    auto body = std::string_view(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    if (trim(body).empty()) continue;
    cfg.set(body);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  return parse(in);
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.push_back(k.name);
  return out;
}

}  // namespace egin
