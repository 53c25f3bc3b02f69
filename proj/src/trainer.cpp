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

#include "sls/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "sls/adamw.hpp"
#include "sls/error.hpp"
#include "sls/eval_metrics.hpp"
#include "sls/format.hpp"
#include "sls/rng.hpp"

namespace sls {
namespace {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

template <typename T>
void parse_into(T& field, std::string_view key, std::string_view value) {
  if constexpr (std::is_same_v<T, double>) {
    const auto v = parse_real(value);
    if (!v || !std::isfinite(*v))
      throw DataError("config: '" + std::string(key) + "' expects a real number, got '" +
                      std::string(value) + "'");
    field = *v;
  } else {
    const auto v = parse_uint(value);
    if (!v || *v > std::numeric_limits<T>::max())
      throw DataError("config: '" + std::string(key) +
                      "' expects a non-negative integer, got '" +
                      std::string(value) + "'");
    field = static_cast<T>(*v);
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double dataset_eer(const Dataset& data, const std::vector<double>& scores) {
  std::vector<double> bona, spoof;
  for (std::size_t i = 0; i < scores.size(); ++i)
    (data.manifest.records()[i].bonafide() ? bona : spoof).push_back(scores[i]);
  return compute_eer(bona, spoof).eer;
}

void check_feature_dims(const Dataset& data, std::uint32_t dim,
                        const char* which) {
  for (const auto& s : data.stacks)
    if (s.dim() != dim)
      throw DataError(std::string(which) + " stack '" + s.utterance_id() +
                      "' has D=" + std::to_string(s.dim()) + ", expected D=" +
                      std::to_string(dim));
}

}  // namespace

void TrainConfig::validate() const {
  const auto bad = [](const std::string& what) {
    throw DataError("config: " + what);
  };
  if (!(std::isfinite(learning_rate) && std::isfinite(eta_min)))
    bad("learning_rate and eta_min must be finite");
  if (!(eta_min >= 0.0)) bad("eta_min must be >= 0");
  if (!(learning_rate >= eta_min)) bad("learning_rate must be >= eta_min");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
    bad("weight_decay must be finite and >= 0");
  if (T_max == 0) bad("T_max must be >= 1");
  if (batch_size == 0) bad("batch_size must be >= 1");
  if (epochs == 0) bad("epochs must be >= 1");
  if (!(focal_gamma >= 0.0) || !std::isfinite(focal_gamma))
    bad("focal_gamma must be finite and >= 0");
  if (!(focal_alpha > 0.0 && focal_alpha < 1.0))
    bad("focal_alpha must lie in (0, 1)");
}

void set_config_value(TrainConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw DataError("config: expected key=value, got '" +
                    std::string(assignment) + "'");
  const std::string_view key = trim(assignment.substr(0, eq));
  const std::string_view value = trim(assignment.substr(eq + 1));
  if (key == "learning_rate") parse_into(config.learning_rate, key, value);
  else if (key == "weight_decay") parse_into(config.weight_decay, key, value);
  else if (key == "T_max") parse_into(config.T_max, key, value);
  else if (key == "eta_min") parse_into(config.eta_min, key, value);
  else if (key == "batch_size") parse_into(config.batch_size, key, value);
  else if (key == "epochs") parse_into(config.epochs, key, value);
  else if (key == "focal_gamma") parse_into(config.focal_gamma, key, value);
  else if (key == "focal_alpha") parse_into(config.focal_alpha, key, value);
  else if (key == "seed") parse_into(config.seed, key, value);
  else throw DataError("config: unknown key '" + std::string(key) + "'");
}

TrainConfig read_train_config(std::istream& in, const std::string& source) {
  TrainConfig config;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    try {
      set_config_value(config, line);
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
  return config;
}

TrainConfig read_train_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open config");
  return read_train_config(in, path.string());
}

void write_train_config(const TrainConfig& c, std::ostream& out) {
  out << "learning_rate=" << format_real(c.learning_rate) << '\n'
      << "weight_decay=" << format_real(c.weight_decay) << '\n'
      << "T_max=" << c.T_max << '\n'
      << "eta_min=" << format_real(c.eta_min) << '\n'
      << "batch_size=" << c.batch_size << '\n'
      << "epochs=" << c.epochs << '\n'
      << "focal_gamma=" << format_real(c.focal_gamma) << '\n'
      << "focal_alpha=" << format_real(c.focal_alpha) << '\n'
      << "seed=" << c.seed << '\n';
}

FocalLoss focal_loss(double score, Label label, double gamma, double alpha) {
  if (!(gamma >= 0.0)) throw DataError("focal_loss: gamma must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DataError("focal_loss: alpha must lie in (0, 1)");
  const bool positive = label == Label::kBonafide;
  const double z = positive ? score : -score;  // logit of the true class
  const double p_true = logistic(z);
  const double p_wrong = logistic(-z);
  const double nll = softplus(-z);  // -ln p_true
  const double weight = positive ? alpha : 1.0 - alpha;
  const double modulator = gamma == 0.0 ? 1.0 : std::pow(p_wrong, gamma);
  const double loss = weight * modulator * nll;
  const double d_z = -weight * modulator * (gamma * p_true * nll + p_wrong);
  return {loss, positive ? d_z : -d_z};
}

double cosine_lr(std::uint64_t epoch, const TrainConfig& config) {
  std::uint64_t phase = epoch % config.T_max;
  if (phase == 0 && epoch > 0) phase = config.T_max;
  if (phase == config.T_max) return config.eta_min;
  const double x = static_cast<double>(phase) / static_cast<double>(config.T_max);
  return config.eta_min + (config.learning_rate - config.eta_min) *
                              (1.0 + std::cos(std::numbers::pi * x)) / 2.0;
}

Dataset load_dataset(const Manifest& manifest,
                     const std::filesystem::path& feature_dir) {
  Dataset data{manifest, {}};
  data.stacks.reserve(manifest.size());
  for (const auto& r : manifest.records()) {
    const auto path = hstk_path(feature_dir, r.utterance_id);
    if (!std::filesystem::exists(path))
      throw DataError("missing feature file for '" + r.utterance_id +
                      "': " + path.string());
    HiddenStack stack = read_hstk_file(path);
    if (stack.utterance_id() != r.utterance_id)
      throw DataError(path.string() + ": stores id '" + stack.utterance_id() +
                      "', manifest expects '" + r.utterance_id + "'");
    data.stacks.push_back(std::move(stack));
  }
  return data;
}

std::vector<double> score_dataset(const Dataset& data,
                                  const SlsParams<double>& params) {
  std::vector<double> scores;
  scores.reserve(data.stacks.size());
  for (const auto& s : data.stacks) scores.push_back(sls_score(s, params));
  return scores;
}

TrainResult train(const Dataset& train_set, const Dataset* dev_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.stacks.empty()) throw DataError("train: empty training set");
  const std::uint32_t dim = train_set.stacks.front().dim();
  check_feature_dims(train_set, dim, "train");
  if (dev_set) check_feature_dims(*dev_set, dim, "dev");

  Rng init_rng(derive_seed(config.seed, 1));
  Rng shuffle_rng(derive_seed(config.seed, 2));
  SlsParams<double> params = init_params<double>(dim, init_rng);
  auto state = OptimizerState<double>::zeros(dim);

  TrainResult result;
  result.params = params;
  std::optional<double> best_dev;
  const std::size_t count = train_set.stacks.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config);
    for (std::size_t i = count; i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < count;
         begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(count, begin + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      auto grad = SlsParams<double>::zeros(dim);
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = order[k];
        const auto fwd = sls_forward(train_set.stacks[i], params);
        const FocalLoss fl =
            focal_loss(fwd.score, train_set.manifest.records()[i].label,
                       config.focal_gamma, config.focal_alpha);
        if (!std::isfinite(fl.loss) || !std::isfinite(fl.d_score))
          throw NumericError("non-finite loss at epoch " +
                             std::to_string(epoch + 1) + ", batch " +
                             std::to_string(batch_index + 1));
        loss_sum += fl.loss;
        grad += sls_backward(fwd.cache, fl.d_score * inv);
      }
      try {
        adamw_step(params, grad, state, lr, config.weight_decay);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " +
                           std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch_index + 1) + ")");
      }
    }
    if (!params.all_finite())
      throw NumericError("parameters became non-finite at epoch " +
                         std::to_string(epoch + 1));

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.lr = lr;
    stats.mean_loss = loss_sum / static_cast<double>(count);
    stats.train_eer = dataset_eer(train_set, score_dataset(train_set, params));
    if (dev_set) {
      stats.dev_eer = dataset_eer(*dev_set, score_dataset(*dev_set, params));
      if (!best_dev || *stats.dev_eer < *best_dev) {
        best_dev = stats.dev_eer;
        result.params = params;
        result.best_epoch = stats.epoch;
      }
    } else {
      result.params = params;
      result.best_epoch = stats.epoch;
    }
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       std::ostream& out) {
  out << "epoch,lr,mean_loss,train_eer,dev_eer\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << format_real(h.lr) << ',' << format_real(h.mean_loss)
        << ',' << format_real(h.train_eer) << ','
        << (h.dev_eer ? format_real(*h.dev_eer) : std::string()) << '\n';
  }
}

}  // namespace sls
