// Python bindings for the core operations: data generation, sample I/O,
// edge building, training, scoring, metrics and embedding analysis.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "egin/config.hpp"
#include "egin/evaluate.hpp"

namespace py = pybind11;
using namespace egin;

namespace {

py::tuple event_tuple(const BehaviorEvent& e) {
  return py::make_tuple(e.kind == EventKind::Click ? "click" : "query", e.entity_id, e.timestamp, e.categories);
}

py::list event_list(const std::vector<BehaviorEvent>& v) {
  py::list out;
  for (const auto& e : v) out.append(event_tuple(e));
  return out;
}

EntityType parse_type(const std::string& name) {
  if (name == "item") return EntityType::Item;
  if (name == "query") return EntityType::Query;
  throw py::value_error("type must be 'item' or 'query'");
}

struct Model {
  RunConfig config;
  EginModel model;
};

}  // namespace

PYBIND11_MODULE(_egin, m) {
  m.doc() = "Joint query-item graph embedding and CTR prediction";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<UndefinedMetric>(m, "UndefinedMetric", base.ptr());

  py::class_<RunConfig>(m, "Config")
      .def(py::init<>())
      .def_static("load", [](const std::filesystem::path& p) { return RunConfig::load(p); })
      .def_static("parse",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return RunConfig::parse(in);
                  })
      .def("set", py::overload_cast<std::string_view, std::string_view>(&RunConfig::set), py::arg("key"),
           py::arg("value"))
      .def("validate", &RunConfig::validate)
      .def("resolved", &RunConfig::resolved)
      .def_static("keys", &RunConfig::keys)
      .def("__repr__", &RunConfig::resolved);

  py::class_<TrainingSample>(m, "Sample")
      .def_readonly("user_id", &TrainingSample::user_id)
      .def_readonly("label", &TrainingSample::label)
      .def_readonly("other_features", &TrainingSample::other_features)
      .def_property_readonly("target_item", [](const TrainingSample& s) { return event_tuple(s.target_item); })
      .def_property_readonly("current_query", [](const TrainingSample& s) { return event_tuple(s.current_query); })
      .def_property_readonly("click_seq", [](const TrainingSample& s) { return event_list(s.click_seq); })
      .def_property_readonly("query_seq", [](const TrainingSample& s) { return event_list(s.query_seq); })
      .def_property_readonly("seeds_seq", [](const TrainingSample& s) { return event_list(s.seeds_seq); })
      .def("__str__", &format_sample)
      .def("__eq__", [](const TrainingSample& a, const TrainingSample& b) { return a == b; });

  m.def("parse_sample", [](const std::string& line) { return parse_sample(line); });
  m.def("read_samples", [](const std::filesystem::path& p) { return read_samples(p); });
  m.def("write_samples",
        [](const std::filesystem::path& p, const std::vector<TrainingSample>& s) { write_samples(p, s); });

  m.def(
      "generate",
      [](const RunConfig& cfg) {
        cfg.validate();
        const auto log = generate_log(cfg.gen);
        auto split = generate_split(cfg.gen, log);
        return py::make_tuple(std::move(split.train), std::move(split.valid));
      },
      py::arg("config"), "Synthetic (train, valid) labeled samples for the config's generator settings.");

  m.def(
      "generate_to",
      [](const RunConfig& cfg, const std::filesystem::path& dir) {
        cfg.validate();
        std::filesystem::create_directories(dir);
        const auto log = generate_log(cfg.gen);
        write_log(dir / "behavior.log", log);
        const auto split = generate_split(cfg.gen, log);
        write_samples(dir / "train.tsv", split.train);
        write_samples(dir / "valid.tsv", split.valid);
      },
      py::arg("config"), py::arg("out_dir"), "Writes behavior.log, train.tsv and valid.tsv.");

  m.def(
      "build_edges",
      [](const TrainingSample& s, const RunConfig& cfg, std::uint64_t seed) {
        Rng rng(seed);
        py::list out;
        for (const auto& e : build_all_edges(s, cfg.train.edges, rng)) {
          out.append(py::make_tuple(std::string(to_string(e.kind)), e.anchor_id, e.positive_id));
        }
        return out;
      },
      py::arg("sample"), py::arg("config"), py::arg("seed") = 1,
      "i2i, q2q and q2i edges of one sample as (kind, anchor, positive).");

  m.def(
      "auc", [](const std::vector<double>& s, const std::vector<int>& y) { return auc(s, y); }, py::arg("scores"),
      py::arg("labels"));
  m.def("relaimpr", &relaimpr, py::arg("auc_model"), py::arg("auc_base"));
  m.def(
      "cosine_sim", [](const std::vector<double>& a, const std::vector<double>& b) { return cosine_sim(a, b); },
      py::arg("a"), py::arg("b"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("config", [](const Model& x) { return x.config; })
      .def("predict", [](const Model& x, const std::vector<TrainingSample>& s) { return x.model.predict(s); })
      .def(
          "evaluate",
          [](const Model& x, const std::vector<TrainingSample>& s) {
            const auto r = evaluate_model(x.model, s);
            py::dict d;
            d["auc"] = r.auc;
            d["n_pos"] = r.n_pos;
            d["n_neg"] = r.n_neg;
            return d;
          },
          py::arg("samples"))
      .def(
          "embedding",
          [](const Model& x, const std::string& type, EntityId id) {
            std::vector<double> scratch;
            const auto v = x.model.graph.of(parse_type(type)).view(id, scratch);
            return std::vector<double>(v.begin(), v.end());
          },
          py::arg("type"), py::arg("id"))
      .def(
          "ids", [](const Model& x, const std::string& type) { return x.model.graph.of(parse_type(type)).ids(); },
          py::arg("type"))
      .def(
          "category_similarity",
          [](const Model& x, const std::vector<TrainingSample>& s, std::size_t pairs, std::uint64_t seed) {
            Rng rng(seed);
            const auto r = category_similarity_report(x.model.graph.items, item_categories(s), pairs, rng);
            return py::make_tuple(r.intra, r.inter);
          },
          py::arg("samples"), py::arg("pairs") = 10000, py::arg("seed") = 1,
          "(intra, inter) mean item cosine over random category pairs.")
      .def(
          "save",
          [](const Model& x, const std::filesystem::path& dir) { save_model(x.model, dir, x.config.resolved()); },
          py::arg("dir"));

  m.def(
      "train",
      [](const RunConfig& cfg, const std::vector<TrainingSample>& train, py::object valid) {
        cfg.validate();
        if (train.empty()) throw Error("training stream is empty");
        Trainer t(cfg.train, train.front().other_features.size());
        std::ostringstream log;
        if (valid.is_none()) {
          py::gil_scoped_release release;
          t.fit(train, nullptr, &log);
        } else {
          const auto v = valid.cast<std::vector<TrainingSample>>();
          py::gil_scoped_release release;
          t.fit(train, &v, &log);
        }
        return py::make_tuple(Model{cfg, t.model()}, log.str());
      },
      py::arg("config"), py::arg("train"), py::arg("valid") = py::none(),
      "Joint training; returns (model, metrics_log_text).");

  m.def(
      "load_model",
      [](const std::filesystem::path& dir) {
        const auto cfg = RunConfig::load(dir / "config.cfg");
        return Model{cfg, load_model(dir, cfg.train)};
      },
      py::arg("dir"));

  m.def(
      "ablate",
      [](const RunConfig& cfg, const std::vector<TrainingSample>& train, const std::vector<TrainingSample>& valid) {
        cfg.validate();
        const auto r = run_ablations(cfg.train, train, valid);
        py::list rows;
        for (const auto& row : r.ablations) rows.append(py::make_tuple(row.name, row.auc, row.diff_pct));
        return rows;
      },
      py::arg("config"), py::arg("train"), py::arg("valid"), "Rows of (name, auc, diff_pct).");

  m.def(
      "dnn_baseline_auc",
      [](const RunConfig& cfg, const std::vector<TrainingSample>& train, const std::vector<TrainingSample>& valid) {
        return dnn_pooling_baseline(train, valid, cfg.train).auc;
      },
      py::arg("config"), py::arg("train"), py::arg("valid"));
}
