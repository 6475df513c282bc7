// egin: command-line entry point for data generation, training, evaluation,
// ablations and embedding analysis.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "egin/config.hpp"
#include "egin/datagen.hpp"
#include "egin/evaluate.hpp"
#include "egin/graph_edges.hpp"
#include "egin/ingest.hpp"
#include "egin/trainer.hpp"

namespace fs = std::filesystem;
using namespace egin;

namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_args(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "key=value config file");
  cmd->add_option("--set", args.overrides, "override one key, e.g. --set dim=16")->take_all();
}

RunConfig resolve(const ConfigArgs& args, const std::optional<fs::path>& fallback = std::nullopt) {
  RunConfig cfg;
  if (!args.path.empty()) {
    if (!fs::exists(args.path)) throw IoError("config file not found: " + args.path);
    cfg = RunConfig::load(args.path);
  } else if (fallback && fs::exists(*fallback)) {
    cfg = RunConfig::load(*fallback);
  }
  for (const auto& o : args.overrides) cfg.set(o);
  cfg.validate();
  std::cerr << "# resolved config\n" << cfg.resolved() << std::flush;
  return cfg;
}

std::vector<TrainingSample> load_samples(const std::string& path) {
  if (!fs::exists(path)) throw IoError("sample file not found: " + path);
  return read_samples(path);
}

EginModel load_trained(const fs::path& dir, const RunConfig& cfg) {
  if (!fs::is_directory(dir)) throw IoError("model directory not found: " + dir.string());
  return load_model(dir, cfg.train);
}

std::vector<EntityId> parse_ids(const std::string& text) {
  std::vector<EntityId> ids;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      ids.push_back(std::stoull(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("bad id in --ids: " + tok);
    }
  }
  if (ids.empty()) throw ParseError("--ids is empty");
  return ids;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

int cmd_gen_data(const ConfigArgs& ca, const std::string& out_dir) {
  const auto cfg = resolve(ca);
  const auto log = generate_log(cfg.gen);
  const auto split = generate_split(cfg.gen, log);
  fs::create_directories(out_dir);
  write_log(fs::path(out_dir) / "behavior.log", log);
  write_samples(fs::path(out_dir) / "train.tsv", split.train);
  write_samples(fs::path(out_dir) / "valid.tsv", split.valid);
  std::size_t events = 0;
  for (const auto& s : log) events += s.events.size();
  std::cout << "users=" << log.size() << " events=" << events << " train=" << split.train.size()
            << " valid=" << split.valid.size() << " out=" << out_dir << '\n';
  return 0;
}

int cmd_build_edges(const ConfigArgs& ca, const std::string& samples_path, const std::string& out_path) {
  const auto cfg = resolve(ca);
  auto samples = load_samples(samples_path);
  Rng rng(mix64(cfg.train.seed ^ 0x3c6ef372fe94f82bULL));
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;
  std::size_t count = 0;
  for (auto& s : samples) {
    apply_limits(s, cfg.train.limits);
    for (const auto& e : build_all_edges(s, cfg.train.edges, rng)) {
      out << to_string(e.kind) << '\t' << e.anchor_id << '\t' << e.positive_id << '\n';
      ++count;
    }
  }
  std::cerr << "edges=" << count << " samples=" << samples.size() << '\n';
  return 0;
}

int cmd_train(const ConfigArgs& ca, const std::string& train_path, const std::string& valid_path,
              const std::string& out_dir, std::string metrics_path) {
  const auto cfg = resolve(ca);
  const auto train = load_samples(train_path);
  std::vector<TrainingSample> valid;
  if (!valid_path.empty()) valid = load_samples(valid_path);
  if (train.empty()) throw Error("training stream is empty: " + train_path);

  fs::create_directories(out_dir);
  if (metrics_path.empty()) metrics_path = (fs::path(out_dir) / "metrics.log").string();
  auto metrics = open_out(metrics_path);

  Trainer trainer(cfg.train, train.front().other_features.size());
  const auto steps = trainer.fit(train, valid.empty() ? nullptr : &valid, &metrics);
  save_model(trainer.model(), out_dir, cfg.resolved());

  const auto& last = steps.back();
  std::cout << "steps=" << steps.size() << " last_total=" << last.total << " model=" << out_dir << '\n';
  if (!valid.empty()) {
    const auto r = evaluate_model(trainer.model(), valid);
    std::cout << "valid_auc=" << std::setprecision(6) << r.auc << '\n';
  }
  return 0;
}

int cmd_eval(const ConfigArgs& ca, const std::string& model_dir, const std::string& samples_path,
             std::optional<double> base_auc, const std::string& base_name) {
  const auto cfg = resolve(ca, fs::path(model_dir) / "config.cfg");
  const auto model = load_trained(model_dir, cfg);
  const auto samples = load_samples(samples_path);
  auto report = evaluate_model(model, samples);
  if (base_auc) report.relaimpr_vs = {base_name, relaimpr(report.auc, *base_auc)};
  write_report(std::cout, report);
  return 0;
}

int cmd_ablate(const ConfigArgs& ca, const std::string& train_path, const std::string& valid_path,
               std::size_t seeds, bool with_baseline) {
  const auto base = resolve(ca);
  const bool generate = train_path.empty();
  if (!generate && valid_path.empty()) throw Error("--train requires --valid");

  std::vector<EvalReport> reports;
  std::vector<double> baseline;
  for (std::size_t s = 0; s < seeds; ++s) {
    RunConfig cfg = base;
    cfg.gen.seed = cfg.train.seed = base.train.seed + s;
    LabeledSplit data;
    if (generate) {
      data = generate_split(cfg.gen, generate_log(cfg.gen));
    } else {
      data.train = load_samples(train_path);
      data.valid = load_samples(valid_path);
    }
    auto r = run_ablations(cfg.train, data.train, data.valid);
    if (with_baseline) baseline.push_back(dnn_pooling_baseline(data.train, data.valid, cfg.train).auc);
    std::cerr << "seed=" << cfg.train.seed;
    for (const auto& row : r.ablations) std::cerr << " [" << row.name << "]=" << row.auc;
    if (with_baseline) std::cerr << " [DNN]=" << baseline.back();
    std::cerr << '\n';
    reports.push_back(std::move(r));
  }

  // Table-shaped summary over seed means.
  EvalReport summary;
  const auto rows = reports.front().ablations.size();
  for (std::size_t i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (const auto& r : reports) sum += r.ablations[i].auc;
    summary.ablations.push_back({reports.front().ablations[i].name, sum / static_cast<double>(seeds), 0.0});
  }
  summary.auc = summary.ablations.front().auc;
  for (auto& row : summary.ablations) row.diff_pct = (row.auc - summary.auc) * 100.0;
  std::cout << "seeds=" << seeds << '\n';
  write_report(std::cout, summary);
  if (with_baseline) {
    double sum = 0.0;
    for (double b : baseline) sum += b;
    const double mean = sum / static_cast<double>(seeds);
    std::cout << "DNN (sum pooling)\t" << std::fixed << std::setprecision(4) << mean << '\n';
    if (mean > 0.5) {
      std::cout << "relaimpr_EGIN_vs_DNN=" << std::setprecision(2) << relaimpr(summary.auc, mean) << "%\n";
    }
  }
  return 0;
}

int cmd_export_emb(const ConfigArgs& ca, const std::string& model_dir, const std::string& out_path,
                   const std::string& which) {
  const auto cfg = resolve(ca, fs::path(model_dir) / "config.cfg");
  const auto model = load_trained(model_dir, cfg);
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;
  if (which == "item" || which == "all") write_embeddings(out, model.graph.items, 8);
  if (which == "query" || which == "all") write_embeddings(out, model.graph.queries, 8);
  return 0;
}

int cmd_analyze_emb(const ConfigArgs& ca, const std::string& model_dir, const std::string& ids_text,
                    const std::string& type_name, const std::string& log_path, std::size_t pairs) {
  const auto cfg = resolve(ca, fs::path(model_dir) / "config.cfg");
  const auto model = load_trained(model_dir, cfg);
  const auto type = entity_type_from_string(type_name);
  if (type != EntityType::Item && type != EntityType::Query) throw Error("--type must be item or query");
  const EmbeddingTable& table = type == EntityType::Item ? model.graph.items : model.graph.queries;

  if (!ids_text.empty()) {
    const auto ids = parse_ids(ids_text);
    std::vector<double> sa;
    std::vector<double> sb;
    std::cout << "id";
    for (auto id : ids) std::cout << '\t' << id;
    std::cout << '\n' << std::fixed << std::setprecision(4);
    for (auto a : ids) {
      std::cout << a;
      for (auto b : ids) std::cout << '\t' << cosine_sim(table.view(a, sa), table.view(b, sb));
      std::cout << '\n';
    }
  }
  if (!log_path.empty()) {
    if (type != EntityType::Item) throw Error("category report is defined for items");
    if (!fs::exists(log_path)) throw IoError("log file not found: " + log_path);
    const auto parsed = parse_log(log_path);
    auto cats = item_categories(parsed.sequences);
    std::erase_if(cats, [&](const auto& kv) { return !table.contains(kv.first); });
    Rng rng(mix64(cfg.train.seed ^ 0xa54ff53a5f1d36f1ULL));
    const auto r = category_similarity_report(table, cats, pairs, rng);
    std::cout << std::setprecision(4) << std::fixed << "Type\tSim\nIntra-Category\t" << r.intra
              << "\nInter-Category\t" << r.inter << "\npairs=" << r.pairs << '\n';
  }
  if (ids_text.empty() && log_path.empty()) throw Error("analyze-emb needs --ids and/or --log");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"egin: graph-enhanced multi-interest CTR model"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ConfigArgs ca;
  std::string out;
  std::string train_path;
  std::string valid_path;
  std::string samples;
  std::string model_dir;
  std::string metrics;
  std::string ids;
  std::string type = "item";
  std::string log_path;
  std::string which = "all";
  std::string base_name = "base";
  std::optional<double> base_auc;
  std::size_t seeds = 1;
  std::size_t pairs = 20000;
  bool with_baseline = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic behavior log and labeled samples");
  add_config_args(gen, ca);
  gen->add_option("--out", out, "output directory")->required();

  auto* edges = app.add_subcommand("build-edges", "write the graph edges of a sample file as TSV");
  add_config_args(edges, ca);
  edges->add_option("--samples", samples, "labeled-sample file")->required();
  edges->add_option("--out", out, "output TSV (stdout when omitted)");

  auto* train = app.add_subcommand("train", "joint training; writes a model directory");
  add_config_args(train, ca);
  train->add_option("--train", train_path, "training samples")->required();
  train->add_option("--valid", valid_path, "validation samples");
  train->add_option("--out", out, "model directory")->required();
  train->add_option("--metrics", metrics, "metrics log (default <out>/metrics.log)");

  auto* eval = app.add_subcommand("eval", "AUC report of a trained model");
  add_config_args(eval, ca);
  eval->add_option("--model", model_dir, "model directory")->required();
  eval->add_option("--samples", samples, "labeled samples")->required();
  eval->add_option("--base-auc", base_auc, "baseline AUC for RelaImpr");
  eval->add_option("--base-name", base_name, "baseline label in the report");

  auto* ablate = app.add_subcommand("ablate", "full model vs. w/o graph, w/o query, w/o pos_emb");
  add_config_args(ablate, ca);
  ablate->add_option("--train", train_path, "training samples (generated from the config when omitted)");
  ablate->add_option("--valid", valid_path, "validation samples");
  ablate->add_option("--seeds", seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  ablate->add_flag("--baseline", with_baseline, "also train the sum-pooling DNN baseline");

  auto* exp = app.add_subcommand("export-emb", "export graph embeddings (8 significant digits)");
  add_config_args(exp, ca);
  exp->add_option("--model", model_dir, "model directory")->required();
  exp->add_option("--out", out, "output TSV (stdout when omitted)");
  exp->add_option("--type", which, "item, query or all")->check(CLI::IsMember({"item", "query", "all"}));

  auto* ana = app.add_subcommand("analyze-emb", "pairwise cosine matrix and category similarity");
  add_config_args(ana, ca);
  ana->add_option("--model", model_dir, "model directory")->required();
  ana->add_option("--ids", ids, "comma-separated ids for a pairwise cosine matrix");
  ana->add_option("--type", type, "item or query")->check(CLI::IsMember({"item", "query"}));
  ana->add_option("--log", log_path, "behavior log supplying item categories");
  ana->add_option("--pairs", pairs, "random pairs per side of the category report");

  if (argc <= 1) {
    std::cout << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen_data(ca, out);
    if (*edges) return cmd_build_edges(ca, samples, out);
    if (*train) return cmd_train(ca, train_path, valid_path, out, metrics);
    if (*eval) return cmd_eval(ca, model_dir, samples, base_auc, base_name);
    if (*ablate) return cmd_ablate(ca, train_path, valid_path, seeds, with_baseline);
    if (*exp) return cmd_export_emb(ca, model_dir, out, which);
    if (*ana) return cmd_analyze_emb(ca, model_dir, ids, type, log_path, pairs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
