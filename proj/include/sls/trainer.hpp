// Copyright 2026 The slsdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLS_TRAINER_HPP
#define SLS_TRAINER_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sls/featstore.hpp"
#include "sls/sls_head.hpp"

namespace sls {

/// Training hyperparameters. Config-file keys are the field names.
struct TrainConfig {
  double learning_rate = 1e-5;
  double weight_decay = 1e-9;
  std::uint32_t T_max = 10;
  double eta_min = 1e-6;
  std::uint32_t batch_size = 5;
  std::uint32_t epochs = 50;
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;
  std::uint64_t seed = 0;

  /// Throws DataError naming the offending field.
  void validate() const;
};

/// Applies one `key=value` assignment. Unknown keys and unparsable values
/// throw DataError.
void set_config_value(TrainConfig& config, std::string_view assignment);

/// Flat `key=value` lines; '#' starts a comment line. Unlisted keys keep
/// their defaults. The result is validated.
TrainConfig read_train_config(std::istream& in, const std::string& source);
TrainConfig read_train_config_file(const std::filesystem::path& path);
void write_train_config(const TrainConfig& config, std::ostream& out);

struct FocalLoss {
  double loss;
  double d_score;
};

/**
   Binary focal loss on a logit and its exact derivative. With p_t the
   probability of the true class and alpha_t = alpha (bonafide) or
   1 - alpha (deepfake): loss = -alpha_t (1 - p_t)^gamma ln p_t. Evaluated
   through softplus so that |score| in the hundreds stays finite.
*/
FocalLoss focal_loss(double score, Label label, double gamma, double alpha);

/// Cosine annealing per epoch. The phase is epoch mod T_max except that
/// positive multiples of T_max sit at the end of their cycle, so epoch 0
/// gives learning_rate and epoch T_max gives eta_min.
double cosine_lr(std::uint64_t epoch, const TrainConfig& config);

/// Manifest rows paired with their stacks, in manifest order.
struct Dataset {
  Manifest manifest;
  std::vector<HiddenStack> stacks;
};

/// Loads `hstk_path(feature_dir, id)` for every manifest row and checks
/// that the stored id matches. Throws DataError naming the first problem.
Dataset load_dataset(const Manifest& manifest,
                     const std::filesystem::path& feature_dir);

struct EpochStats {
  std::uint32_t epoch = 0;  // 1-based
  double lr = 0.0;
  double mean_loss = 0.0;   // per-trial mean over the epoch
  double train_eer = 0.0;   // after the epoch's updates
  std::optional<double> dev_eer;
};

struct TrainResult {
  SlsParams<double> params;  // best dev epoch, or final epoch without dev
  std::uint32_t best_epoch = 0;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/**
   Trains the head on frozen features. Parameters are initialised from
   `derive_seed(seed, 1)`, the per-epoch shuffle uses `derive_seed(seed, 2)`.
   Each mini-batch (the last may be short) averages its focal losses and
   takes one AdamW step at the epoch's cosine rate. Throws NumericError on
   a non-finite loss or gradient.
*/
TrainResult train(const Dataset& train_set, const Dataset* dev_set,
                  const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Scores every stack of `data` in manifest order.
std::vector<double> score_dataset(const Dataset& data,
                                  const SlsParams<double>& params);

/// CSV `epoch,lr,mean_loss,train_eer,dev_eer`; dev_eer empty when absent.
void write_history_csv(const std::vector<EpochStats>& history,
                       std::ostream& out);

}  // namespace sls

#endif  // SLS_TRAINER_HPP
