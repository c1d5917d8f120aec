/*
 * Copyright 2026 The avqa Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Batch commands behind the `avqa` executable. Each takes a validated
// RunConfig, writes under cfg.output_dir and reports progress on `log`.

#ifndef AVQA_CLI_HPP_
#define AVQA_CLI_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "avqa/config.hpp"
#include "avqa/metrics.hpp"
#include "avqa/siti.hpp"
#include "avqa/subjective.hpp"

namespace avqa {

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Seeded Fisher-Yates over the sorted ids; the test set takes
// floor(n * (1 - ratio)) of them.
SplitAssignment make_split(std::vector<std::string> ids, double ratio, std::uint64_t seed);
// `sequence_id,split`, rows sorted by id.
std::string format_split_csv(const SplitAssignment& s);
// Throws ValidationError when an id appears twice (split leakage).
SplitAssignment parse_split_csv(std::string_view text);

ModelInput load_model_input(const RunConfig& cfg, const std::string& sequence_id);

std::vector<MOSRecord> cmd_process_scores(const RunConfig& cfg, std::ostream& log);
std::vector<SITIRow> cmd_siti(const RunConfig& cfg, std::ostream& log);
void cmd_hm_stats(const RunConfig& cfg, std::ostream& log);
SplitAssignment cmd_split(const RunConfig& cfg, std::ostream& log);
void cmd_extract_features(const RunConfig& cfg, std::ostream& log);
TrainResult cmd_train(const RunConfig& cfg, std::ostream& log);

struct Prediction {
  std::string sequence_id;
  double score = 0.0;
  double mos = 0.0;
};
struct Evaluation {
  std::vector<Prediction> predictions;
  MetricReport report;
};
// `on` is "train", "test" or "all".
Evaluation cmd_evaluate(const RunConfig& cfg, const std::string& on, std::ostream& log);
double cmd_predict(const RunConfig& cfg, const std::string& sequence_id, std::ostream& log);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace avqa

#endif  // AVQA_CLI_HPP_
