#include "gmmpc/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gmmpc/error.hpp"
#include "gmmpc/mpc.hpp"

namespace gmmpc {

using nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormat = "gmmpc-checkpoint";
constexpr int kVersion = 1;

std::vector<std::string> names_of(const Dag& dag, const std::vector<NodeId>& ids) {
  std::vector<std::string> out;
  for (NodeId v : ids) out.push_back(dag.name(v));
  return out;
}

}  // namespace

std::string checkpoint_json(const BnModel& bn) {
  ordered_json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["kind"] = to_string(bn.kind);
  doc["link"] = to_string(bn.link);
  doc["graph"] = ordered_json::parse(serialize_graph(bn.dag));
  if (bn.normalization) {
    doc["normalization"] = {{"columns", bn.normalization->columns},
                            {"mean", bn.normalization->mean},
                            {"stddev", bn.normalization->stddev}};
  } else {
    doc["normalization"] = nullptr;
  }
  auto nodes = ordered_json::array();
  for (const auto& nm : bn.nodes) {
    ordered_json node;
    node["name"] = bn.dag.name(nm.node);
    node["kind"] = to_string(nm.kind);
    node["link"] = to_string(nm.link);
    auto mpcs = ordered_json::array();
    if (nm.kind == ModelKind::gmm_mpc)
      for (const auto& c : find_mpcs_fast(bn.dag, nm.node).cliques) mpcs.push_back(names_of(bn.dag, c));
    node["mpcs"] = std::move(mpcs);
    auto branches = ordered_json::array();
    for (std::size_t k = 0; k < nm.size(); ++k) {
      const auto& br = nm.branches[k];
      branches.push_back({{"inputs", names_of(bn.dag, br.inputs)},
                          {"weights", br.weights},
                          {"bias", br.bias},
                          {"variance", br.variance()},
                          {"log_variance", br.log_var},
                          {"pi", nm.pi[k]}});
    }
    node["branches"] = std::move(branches);
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

BnModel parse_checkpoint(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("checkpoint: ") + e.what());
  }
  try {
    if (doc.value("format", std::string()) != kFormat)
      throw Error(ErrorCode::parse, "checkpoint: not a gmmpc checkpoint");
    if (doc.at("version").get<int>() != kVersion)
      throw Error(ErrorCode::parse, "checkpoint: unsupported version");
    BnModel bn;
    bn.dag = parse_graph(doc.at("graph").dump());
    bn.kind = parse_kind(doc.at("kind").get<std::string>());
    bn.link = parse_link(doc.at("link").get<std::string>());
    if (!doc.at("normalization").is_null()) {
      const auto& n = doc["normalization"];
      NormStats s;
      s.columns = n.at("columns").get<std::vector<std::string>>();
      s.mean = n.at("mean").get<std::vector<double>>();
      s.stddev = n.at("stddev").get<std::vector<double>>();
      if (s.mean.size() != s.columns.size() || s.stddev.size() != s.columns.size())
        throw Error(ErrorCode::parse, "checkpoint: normalization arrays differ in length");
      bn.normalization = std::move(s);
    }
    const auto& nodes = doc.at("nodes");
    if (nodes.size() != bn.dag.size())
      throw Error(ErrorCode::parse, "checkpoint: node count does not match the graph");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& jn = nodes[i];
      NodeModel nm;
      nm.node = bn.dag.id(jn.at("name").get<std::string>());
      if (nm.node != i) throw Error(ErrorCode::parse, "checkpoint: nodes out of graph order");
      nm.kind = parse_kind(jn.at("kind").get<std::string>());
      nm.link = parse_link(jn.at("link").get<std::string>());
      for (const auto& jb : jn.at("branches")) {
        BranchParams br;
        for (const auto& in : jb.at("inputs")) br.inputs.push_back(bn.dag.id(in.get<std::string>()));
        br.weights = jb.at("weights").get<std::vector<double>>();
        br.bias = jb.at("bias").get<double>();
        if (jb.contains("log_variance")) {
          br.log_var = jb["log_variance"].get<double>();
        } else {
          const double var = jb.at("variance").get<double>();
          if (!(var > 0.0)) throw Error(ErrorCode::parse, "checkpoint: variance must be positive");
          br.log_var = std::log(var);
        }
        nm.pi.push_back(jb.at("pi").get<double>());
        nm.branches.push_back(std::move(br));
      }
      bn.nodes.push_back(std::move(nm));
    }
    validate(bn);
    return bn;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse) throw;
    throw Error(ErrorCode::parse, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const BnModel& bn, const std::string& path) {
  write_text_file(path, checkpoint_json(bn));
}

BnModel load_checkpoint(const std::string& path) {
  try {
    return parse_checkpoint(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string report_jsonl(const TrainReport& report) {
  std::string out;
  for (std::size_t t = 0; t < report.loss_per_outer_epoch.size(); ++t) {
    ordered_json rec;
    rec["outer"] = t + 1;
    rec["train_loss"] = report.loss_per_outer_epoch[t];
    if (t < report.val_avg_nll_per_outer_epoch.size())
      rec["val_avg_nll"] = report.val_avg_nll_per_outer_epoch[t];
    else
      rec["val_avg_nll"] = nullptr;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::string report_summary_json(const TrainReport& report) {
  ordered_json doc;
  doc["epochs"] = report.epochs;
  doc["loss_per_outer_epoch"] = report.loss_per_outer_epoch;
  doc["final_train_loss"] = report.final_train_loss;
  doc["best_outer_epoch"] = report.best_outer_epoch;
  doc["stopped_early"] = report.stopped_early;
  doc["wall_time_seconds"] = report.wall_time_seconds;
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gmmpc
