#pragma once

#include <string>
#include <string_view>

#include "gmmpc/model.hpp"
#include "gmmpc/optim.hpp"

namespace gmmpc {

/// Model checkpoint: graph, normalisation statistics and, per node, kind,
/// link, MPC member lists and per-branch {weights, bias, variance, pi}.
std::string checkpoint_json(const BnModel& bn);
BnModel parse_checkpoint(std::string_view text);
void save_checkpoint(const BnModel& bn, const std::string& path);
BnModel load_checkpoint(const std::string& path);

/// One JSON object per outer epoch: {"outer": t, "train_loss": ..., "val_avg_nll": ...}.
std::string report_jsonl(const TrainReport& report);
std::string report_summary_json(const TrainReport& report);

void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace gmmpc
