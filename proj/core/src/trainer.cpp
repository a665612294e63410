// Copyright 2026 The AirComp Toolkit Authors
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

#include "aircomp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kHeldoutStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kInitStream = 4;

bool all_finite(const std::vector<ad::Array>& arrays) {
  for (const ad::Array& a : arrays) {
    for (double x : a.data) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

std::vector<NetworkRealization> make_set(const ScenarioConfig& sc, std::uint64_t seed, std::size_t n) {
  std::vector<NetworkRealization> set;
  set.reserve(n);
  for (std::size_t i = 0; i < n; ++i) set.push_back(generate_realization(sc, seed, i));
  return set;
}

class AdamState {
 public:
  explicit AdamState(const std::vector<ad::Array>& params) {
    for (const ad::Array& p : params) {
      m_.emplace_back(p.rows, p.cols);
      v_.emplace_back(p.rows, p.cols);
    }
  }

  void step(std::vector<ad::Array>& params, const std::vector<ad::Array>& grads, double lr, const TrainConfig& c) {
    ++t_;
    const double bc1 = 1.0 - std::pow(c.adam_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(c.adam_beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
      for (std::size_t i = 0; i < params[p].size(); ++i) {
        const double g = grads[p].data[i];
        double& m = m_[p].data[i];
        double& v = v_[p].data[i];
        m = c.adam_beta1 * m + (1.0 - c.adam_beta1) * g;
        v = c.adam_beta2 * v + (1.0 - c.adam_beta2) * g * g;
        params[p].data[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + c.adam_eps);
      }
    }
  }

 private:
  std::vector<ad::Array> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("TrainConfig: batch_size must be >= 1");
  if (dataset_size < 1) throw ValidationError("TrainConfig: dataset_size must be >= 1");
  if (!(lr0 > 0.0)) throw ValidationError("TrainConfig: lr0 must be > 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ValidationError("TrainConfig: decay must be in (0, 1]");
  if (decay_interval < 1) throw ValidationError("TrainConfig: decay_interval must be >= 1");
  if (!(stage1_fraction > 0.0 && stage1_fraction < 1.0)) {
    throw ValidationError("TrainConfig: stage1_fraction must be in (0, 1)");
  }
  if (max_grad_norm < 0.0) throw ValidationError("TrainConfig: max_grad_norm must be >= 0");
  scenario.validate();
  model.validate();
}

double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
  return cfg.lr0 * std::pow(cfg.decay, static_cast<double>(epoch / cfg.decay_interval));
}

std::uint32_t stage_of_epoch(const TrainConfig& cfg, std::size_t epoch) {
  const auto stage1 = static_cast<std::size_t>(std::ceil(cfg.stage1_fraction * static_cast<double>(cfg.epochs)));
  return epoch < stage1 ? 1u : 2u;
}

std::vector<NetworkRealization> make_training_set(const TrainConfig& cfg) {
  return make_set(cfg.scenario, split_seed(cfg.seed, kTrainStream), cfg.dataset_size);
}

std::vector<NetworkRealization> make_heldout_set(const TrainConfig& cfg) {
  return make_set(cfg.scenario, split_seed(cfg.seed, kHeldoutStream), cfg.heldout_size);
}

ad::Var rate_objective(const std::vector<ad::Var>& mse, const NetworkRealization& r, std::uint32_t stage) {
  if (mse.empty()) throw ValidationError("rate_objective: no clusters");
  ad::Var total;
  for (std::size_t k = 0; k < mse.size(); ++k) {
    ad::Var term = ad::scale(ad::log2(mse[k]), -1.0);
    if (stage >= 2) term = ad::positive_part(term);
    term = ad::scale(term, rate_scale(k, r));
    total = k == 0 ? term : ad::add(total, term);
  }
  return total;
}

BatchResult batch_loss(const UdglModel& model, std::span<const NetworkRealization> batch, std::uint32_t stage,
                       bool with_grad, std::size_t first_sample_id) {
  if (batch.empty()) throw ValidationError("batch_loss: empty batch");
  BatchResult out;
  if (with_grad) {
    for (const ad::Array& p : model.parameters()) out.grads.emplace_back(p.rows, p.cols);
  }
  if (!all_finite(model.parameters())) {
    throw NonFiniteError("batch_loss: model has non-finite parameters", static_cast<long>(first_sample_id));
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const NetworkRealization& r = batch[s];
    const long sample_id = static_cast<long>(first_sample_id + s);
    ad::Tape tape;
    const std::vector<ad::Var> params = bind_parameters(tape, model, with_grad);
    UdglGraph g;
    try {
      g = build_udgl_graph(tape, model, params, r, udgl_initial_scalars(r));
    } catch (const SingularMatrixError& e) {
      throw NonFiniteError("batch_loss: sample " + std::to_string(sample_id) + ": " + e.what(), sample_id);
    }
    const ad::Var objective = rate_objective(g.mse, r, stage);
    const double value = objective.value().data[0];
    if (!std::isfinite(value)) {
      throw NonFiniteError("batch_loss: non-finite rate for sample " + std::to_string(sample_id), sample_id);
    }
    out.loss -= value * inv_n;
    double clamped = 0.0;
    for (std::size_t k = 0; k < g.mse.size(); ++k) {
      clamped += r.config.weights[k] *
                 aircomp_rate(g.mse[k].value().data[0], r.config.quant_bits[k], r.cluster_size(k));
    }
    out.mean_rate += clamped * inv_n;
    if (!with_grad) continue;
    tape.backward(objective);
    for (std::size_t p = 0; p < params.size(); ++p) {
      const ad::Array& gp = params[p].grad();
      for (std::size_t i = 0; i < gp.size(); ++i) out.grads[p].data[i] -= gp.data[i] * inv_n;
    }
  }
  return out;
}

TrainResult train(const TrainConfig& cfg, const UdglModel* init) {
  cfg.validate();
  TrainResult res;
  res.model = init ? *init : UdglModel(cfg.model, split_seed(cfg.seed, kInitStream));
  if (init && !(init->config() == cfg.model)) {
    spdlog::info("train: using the architecture of the initial model");
  }
  const std::vector<NetworkRealization> data = make_training_set(cfg);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(split_seed(cfg.seed, kShuffleStream));
  AdamState adam(res.model.parameters());
  UdglModel last_good = res.model;
  std::uint32_t last_stage = 1;

  auto abort_run = [&](const std::string& why, std::size_t epoch) {
    spdlog::error("train: aborting at epoch {}: {}", epoch, why);
    res.model = last_good;
    res.aborted = true;
    res.abort_reason = why;
    if (!cfg.checkpoint_path.empty()) {
      save_checkpoint(res.model, {static_cast<std::uint32_t>(epoch), learning_rate(cfg, epoch), last_stage, cfg.seed},
                      cfg.checkpoint_path);
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    const std::uint32_t stage = stage_of_epoch(cfg, epoch);
    last_stage = stage;
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec{epoch, stage, lr, 0.0, 0.0};
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<NetworkRealization> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      BatchResult br;
      try {
        br = batch_loss(res.model, batch, stage, true, order[start]);
      } catch (const NonFiniteError& e) {
        abort_run(e.what(), epoch);
        return res;
      }
      if (!all_finite(br.grads)) {
        abort_run("non-finite gradient", epoch);
        return res;
      }
      if (cfg.max_grad_norm > 0.0) {
        double sq = 0.0;
        for (const ad::Array& g : br.grads) {
          for (double x : g.data) sq += x * x;
        }
        const double norm = std::sqrt(sq);
        if (norm > cfg.max_grad_norm) {
          const double f = cfg.max_grad_norm / norm;
          for (ad::Array& g : br.grads) {
            for (double& x : g.data) x *= f;
          }
        }
      }
      last_good = res.model;
      auto& params = res.model.parameters();
      if (cfg.optimizer == Optimizer::adam) {
        adam.step(params, br.grads, lr, cfg);
      } else {
        for (std::size_t p = 0; p < params.size(); ++p) {
          for (std::size_t i = 0; i < params[p].size(); ++i) params[p].data[i] -= lr * br.grads[p].data[i];
        }
      }
      if (!all_finite(params)) {
        abort_run("non-finite parameters after update", epoch);
        return res;
      }
      rec.mean_loss += br.loss;
      rec.mean_rate += br.mean_rate;
      ++batches;
    }
    rec.mean_loss /= static_cast<double>(batches);
    rec.mean_rate /= static_cast<double>(batches);
    res.log.epochs.push_back(rec);
    if (cfg.log_every > 0 && (epoch % cfg.log_every == 0 || epoch + 1 == cfg.epochs)) {
      spdlog::info("epoch {:5d} stage {} lr {:.3e} loss {:.6f} R {:.6f}", epoch, stage, lr, rec.mean_loss,
                   rec.mean_rate);
    }
  }
  if (!cfg.checkpoint_path.empty()) {
    save_checkpoint(res.model,
                    {static_cast<std::uint32_t>(cfg.epochs), learning_rate(cfg, cfg.epochs), last_stage, cfg.seed},
                    cfg.checkpoint_path);
  }
  return res;
}

void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("write_train_log_csv: cannot open " + path.string());
  out << "# aircomp-csv v1 kind=train\n";
  out << "epoch,stage,lr,mean_loss,mean_R\n";
  out.precision(17);
  for (const EpochRecord& e : log.epochs) {
    out << e.epoch << ',' << e.stage << ',' << e.lr << ',' << e.mean_loss << ',' << e.mean_rate << '\n';
  }
  if (!out) throw ValidationError("write_train_log_csv: write failed for " + path.string());
}

EvalSummary summarize_reports(std::span<const RateReport> reports) {
  if (reports.empty()) throw ValidationError("summarize_reports: empty set");
  EvalSummary s;
  s.count = reports.size();
  std::vector<double> rates;
  rates.reserve(reports.size());
  s.mean_cluster_rates.assign(reports.front().rate.size(), 0.0);
  for (const RateReport& rep : reports) {
    rates.push_back(rep.weighted_sum);
    s.mean_rate += rep.weighted_sum;
    for (std::size_t k = 0; k < rep.rate.size() && k < s.mean_cluster_rates.size(); ++k) {
      s.mean_cluster_rates[k] += rep.rate[k];
    }
  }
  const double n = static_cast<double>(reports.size());
  s.mean_rate /= n;
  for (double& x : s.mean_cluster_rates) x /= n;
  std::sort(rates.begin(), rates.end());
  for (std::size_t q = 0; q < kSummaryQuantiles.size(); ++q) {
    // Linear interpolation between order statistics.
    const double pos = kSummaryQuantiles[q] * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, rates.size() - 1);
    s.quantiles[q] = rates[lo] + (pos - static_cast<double>(lo)) * (rates[hi] - rates[lo]);
  }
  return s;
}

EvalSummary evaluate(const UdglModel& model, std::span<const NetworkRealization> set) {
  if (set.empty()) throw ValidationError("evaluate: empty set");
  std::vector<RateReport> reports;
  reports.reserve(set.size());
  for (const NetworkRealization& r : set) reports.push_back(weighted_sum_rate(udgl_forward(model, r), r));
  return summarize_reports(reports);
}

}  // namespace aircomp
