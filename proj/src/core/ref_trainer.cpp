// SPDX-License-Identifier: Apache-2.0
#include "core/ref_trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "core/common.hpp"

namespace aet {

namespace {

// Weights of input index i falling into each of `bins` equal-width bins over
// [0, n): each bin averages the input it covers, fractionally at its edges.
struct PoolWeight {
  std::size_t bin;
  std::size_t input;
  double weight;
};

std::vector<PoolWeight> pooling_weights(std::size_t n, std::size_t bins) {
  std::vector<PoolWeight> out;
  const double width = static_cast<double>(n) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) * width;
    const double hi = lo + width;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t i = first; i < last; ++i) {
      const double overlap = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
      if (overlap > 0.0) out.push_back({b, i, overlap / width});
    }
  }
  return out;
}

}  // namespace

std::vector<double> featurize(const Scalogram& s) {
  if (s.n_scales == 0 || s.n_time == 0) fail(ErrorCode::invalid_argument, "featurize of an empty scalogram");
  const auto col_w = pooling_weights(s.n_time, kPoolSide);
  const auto row_w = pooling_weights(s.n_scales, kPoolSide);
  std::vector<double> cols(s.n_scales * kPoolSide, 0.0);
  for (std::size_t r = 0; r < s.n_scales; ++r) {
    for (const auto& w : col_w) cols[r * kPoolSide + w.bin] += w.weight * s.at(r, w.input);
  }
  std::vector<double> out(kFeatureDim, 0.0);
  for (const auto& w : row_w) {
    for (std::size_t c = 0; c < kPoolSide; ++c) out[w.bin * kPoolSide + c] += w.weight * cols[w.input * kPoolSide + c];
  }
  return out;
}

void LabeledFeatures::push_back(std::span<const double> features, int label) {
  if (features.size() != dim) fail(ErrorCode::invalid_argument, "feature dimension mismatch");
  values.insert(values.end(), features.begin(), features.end());
  labels.push_back(label);
}

Standardizer Standardizer::fit(const LabeledFeatures& data) {
  if (data.size() == 0) fail(ErrorCode::invalid_argument, "cannot standardize an empty set");
  Standardizer st;
  st.mean.assign(data.dim, 0.0);
  st.scale.assign(data.dim, 0.0);
  const auto n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = data.row(i);
    for (std::size_t d = 0; d < data.dim; ++d) st.mean[d] += r[d];
  }
  for (auto& m : st.mean) m /= n;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = data.row(i);
    for (std::size_t d = 0; d < data.dim; ++d) st.scale[d] += (r[d] - st.mean[d]) * (r[d] - st.mean[d]);
  }
  for (auto& s : st.scale) {
    s = std::sqrt(s / n);
    if (!(s > 1e-12)) s = 1.0;
  }
  return st;
}

void Standardizer::apply(std::span<double> x) const {
  if (empty()) return;
  if (x.size() != mean.size()) fail(ErrorCode::invalid_argument, "feature dimension mismatch");
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = (x[d] - mean[d]) / scale[d];
}

LinearSoftmaxModel LinearSoftmaxModel::zeros(int num_classes, std::size_t feature_dim) {
  LinearSoftmaxModel m;
  m.num_classes = num_classes;
  m.feature_dim = feature_dim;
  m.parameters.assign(static_cast<std::size_t>(num_classes) * (feature_dim + 1), 0.0);
  return m;
}

std::vector<double> logits_standardized(const LinearSoftmaxModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dim) {
    fail(ErrorCode::invalid_argument, "expected " + std::to_string(model.feature_dim) + " features, got " +
                                          std::to_string(x.size()));
  }
  const auto k = static_cast<std::size_t>(model.num_classes);
  const std::size_t d = model.feature_dim;
  std::vector<double> z(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double* w = model.parameters.data() + c * d;
    double acc = model.parameters[k * d + c];
    for (std::size_t i = 0; i < d; ++i) acc += w[i] * x[i];
    z[c] = acc;
  }
  return z;
}

std::vector<double> predict(const LinearSoftmaxModel& model, std::span<const double> raw_features) {
  std::vector<double> x(raw_features.begin(), raw_features.end());
  if (x.size() != model.feature_dim) {
    fail(ErrorCode::invalid_argument, "expected " + std::to_string(model.feature_dim) + " features, got " +
                                          std::to_string(x.size()));
  }
  model.standardizer.apply(x);
  return softmax(logits_standardized(model, x));
}

int predict_class(const LinearSoftmaxModel& model, std::span<const double> raw_features) {
  return argmax_class(predict(model, raw_features));
}

ConfusionMatrix evaluate(const LinearSoftmaxModel& model, const LabeledFeatures& data) {
  ConfusionMatrix cm(model.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) cm.accumulate(data.labels[i], predict_class(model, data.row(i)));
  return cm;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"optimizer", to_string(c.optimizer)},
          {"schedule", to_string(c.schedule)},
          {"lr_max", c.lr_max},
          {"loss", to_string(c.loss)},
          {"seed", c.seed},
          {"momentum", c.hyper.momentum},
          {"weight_decay", c.hyper.weight_decay},
          {"beta2", c.hyper.beta2},
          {"epsilon", c.hyper.epsilon},
          {"div_factor", c.div_factor},
          {"warmup_fraction", c.warmup_fraction},
          {"final_div_factor", c.final_div_factor},
          {"piecewise_drop", c.piecewise_drop},
          {"piecewise_period_epochs", c.piecewise_period_epochs},
          {"val_every", c.val_every},
          {"init_scale", c.init_scale},
          {"num_classes", c.num_classes}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("optimizer")) c.optimizer = parse_optimizer_kind(j.at("optimizer").get<std::string>());
    if (j.contains("schedule")) c.schedule = parse_schedule_kind(j.at("schedule").get<std::string>());
    c.lr_max = j.value("lr_max", c.lr_max);
    if (j.contains("loss")) c.loss = parse_loss_kind(j.at("loss").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.hyper.momentum = j.value("momentum", c.hyper.momentum);
    c.hyper.weight_decay = j.value("weight_decay", c.hyper.weight_decay);
    c.hyper.beta2 = j.value("beta2", c.hyper.beta2);
    c.hyper.epsilon = j.value("epsilon", c.hyper.epsilon);
    c.div_factor = j.value("div_factor", c.div_factor);
    c.warmup_fraction = j.value("warmup_fraction", c.warmup_fraction);
    c.final_div_factor = j.value("final_div_factor", c.final_div_factor);
    c.piecewise_drop = j.value("piecewise_drop", c.piecewise_drop);
    c.piecewise_period_epochs = j.value("piecewise_period_epochs", c.piecewise_period_epochs);
    c.val_every = j.value("val_every", c.val_every);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.num_classes = j.value("num_classes", c.num_classes);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("malformed training config: ") + e.what());
  }
  return c;
}

LearningRateSchedule make_schedule(const TrainConfig& cfg, std::int64_t iterations_per_epoch, std::int64_t iterations) {
  LearningRateSchedule s;
  s.kind = cfg.schedule;
  s.onecycle.lr_max = cfg.lr_max;
  s.onecycle.div_factor = cfg.div_factor;
  s.onecycle.warmup_fraction = cfg.warmup_fraction;
  s.onecycle.final_div_factor = cfg.final_div_factor;
  // The last mini-batch runs at the terminal learning rate.
  s.onecycle.total_iterations = std::max<std::int64_t>(2, iterations - 1);
  s.drop_factor = cfg.piecewise_drop;
  s.drop_period_epochs = cfg.piecewise_period_epochs;
  s.iterations_per_epoch = iterations_per_epoch;
  return s;
}

namespace {

void validate(const TrainConfig& c) {
  if (c.epochs < 0) fail(ErrorCode::invalid_argument, "epochs must be >= 0");
  if (c.batch_size < 1) fail(ErrorCode::invalid_argument, "batch_size must be >= 1");
  if (!(c.lr_max > 0.0)) fail(ErrorCode::invalid_argument, "lr_max must be positive");
  if (c.val_every < 1) fail(ErrorCode::invalid_argument, "val_every must be >= 1");
  if (c.num_classes < 2) fail(ErrorCode::invalid_argument, "num_classes must be >= 2");
}

LabeledFeatures standardized(const LabeledFeatures& data, const Standardizer& st) {
  LabeledFeatures out = data;
  for (std::size_t i = 0; i < out.size(); ++i) st.apply({out.values.data() + i * out.dim, out.dim});
  return out;
}

ConfusionMatrix evaluate_standardized(const LinearSoftmaxModel& model, const LabeledFeatures& data) {
  ConfusionMatrix cm(model.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    cm.accumulate(data.labels[i], argmax_class(logits_standardized(model, data.row(i))));
  }
  return cm;
}

}  // namespace

TrainResult train(const LabeledFeatures& train_set, const LabeledFeatures& val_set, const TrainConfig& cfg) {
  validate(cfg);
  if (train_set.size() == 0) fail(ErrorCode::invalid_argument, "empty training set");
  if (val_set.size() > 0 && val_set.dim != train_set.dim) fail(ErrorCode::invalid_argument, "feature dimension mismatch");
  const int k = cfg.num_classes;
  std::vector<std::size_t> per_class(static_cast<std::size_t>(k), 0);
  for (int y : train_set.labels) {
    if (y < 1 || y > k) fail(ErrorCode::invalid_argument, "label " + std::to_string(y) + " outside 1.." + std::to_string(k));
    ++per_class[static_cast<std::size_t>(y - 1)];
  }
  for (int c = 1; c <= k; ++c) {
    if (per_class[static_cast<std::size_t>(c - 1)] == 0) {
      fail(ErrorCode::invalid_argument, "class " + std::to_string(c) + " has no training samples");
    }
  }

  TrainResult result;
  auto& model = result.model;
  model = LinearSoftmaxModel::zeros(k, train_set.dim);
  model.loss = cfg.loss;
  model.standardizer = Standardizer::fit(train_set);
  model.fingerprint = {{"train", train_config_to_json(cfg)},
                       {"n_train", train_set.size()},
                       {"n_val", val_set.size()}};
  {
    std::mt19937_64 init_rng(mix_seed(cfg.seed, 11));
    std::normal_distribution<double> gauss(0.0, cfg.init_scale);
    const std::size_t n_weights = static_cast<std::size_t>(k) * train_set.dim;
    for (std::size_t i = 0; i < n_weights; ++i) model.parameters[i] = gauss(init_rng);
  }
  if (cfg.epochs == 0) return result;

  const auto train_std = standardized(train_set, model.standardizer);
  const auto val_std = standardized(val_set, model.standardizer);
  const auto n = static_cast<std::int64_t>(train_set.size());
  const std::int64_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::int64_t total = per_epoch * cfg.epochs;
  const auto schedule = make_schedule(cfg, per_epoch, total);

  OptimizerState state(model.parameters.size(), cfg.hyper);
  std::vector<double> grad(model.parameters.size());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 12));
  const std::size_t dim = train_set.dim;
  const auto kk = static_cast<std::size_t>(k);

  std::int64_t iteration = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::int64_t b = 0; b < per_epoch; ++b, ++iteration) {
      const std::size_t begin = static_cast<std::size_t>(b * cfg.batch_size);
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss_sum = 0.0;
      for (std::size_t s = begin; s < end; ++s) {
        const std::size_t idx = order[s];
        const auto x = train_std.row(idx);
        const auto p = softmax(logits_standardized(model, x));
        const TargetLabel target{train_std.labels[idx]};
        loss_sum += loss_value(cfg.loss, target, p);
        const auto g = loss_grad(cfg.loss, target, p);
        for (std::size_t c = 0; c < kk; ++c) {
          const double gc = g.wrt_logits[c];
          double* gw = grad.data() + c * dim;
          for (std::size_t d = 0; d < dim; ++d) gw[d] += gc * x[d];
          grad[kk * dim + c] += gc;
        }
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (auto& v : grad) v *= inv;
      const double batch_loss = loss_sum * inv;
      if (!std::isfinite(batch_loss)) {
        fail(ErrorCode::numeric, "training diverged: non-finite loss at iteration " + std::to_string(iteration));
      }
      const double lr = schedule.lr(iteration);
      optimizer_step(cfg.optimizer, state, model.parameters, grad, lr);

      TrainLogRow row;
      row.iteration = iteration;
      row.epoch = epoch;
      row.lr = lr;
      row.train_loss = batch_loss;
      const bool last = iteration + 1 == total;
      if (val_std.size() > 0 && (iteration % cfg.val_every == 0 || last)) {
        const auto cm = evaluate_standardized(model, val_std);
        row.val_acc = accuracy(cm);
        row.val_acc_pm1 = accuracy_pm1(cm);
      }
      result.log.push_back(row);
    }
  }
  for (double v : model.parameters) {
    if (!std::isfinite(v)) fail(ErrorCode::numeric, "training produced non-finite parameters");
  }
  return result;
}

std::string train_log_to_csv(const std::vector<TrainLogRow>& log) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,epoch,lr,train_loss,val_acc,val_acc_pm1\n";
  for (const auto& r : log) {
    out << r.iteration << ',' << r.epoch << ',' << r.lr << ',' << r.train_loss << ',';
    if (r.val_acc) out << *r.val_acc;
    out << ',';
    if (r.val_acc_pm1) out << *r.val_acc_pm1;
    out << '\n';
  }
  return out.str();
}

namespace {

constexpr char kModelMagic[8] = {'A', 'E', 'T', 'M', 'O', 'D', 'E', 'L'};

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void save_model(const LinearSoftmaxModel& model, const std::string& path) {
  const nlohmann::json header = {{"format", "aet-linear-softmax-v1"},
                                 {"num_classes", model.num_classes},
                                 {"feature_dim", model.feature_dim},
                                 {"loss", to_string(model.loss)},
                                 {"n_parameters", model.parameters.size()},
                                 {"standardized", !model.standardizer.empty()},
                                 {"fingerprint", model.fingerprint}};
  const std::string text = header.dump();
  std::string blob(kModelMagic, sizeof kModelMagic);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) blob.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
  blob += text;
  auto put_all = [&blob](const std::vector<double>& v) {
    for (double x : v) put_u64_le(blob, std::bit_cast<std::uint64_t>(x));
  };
  put_all(model.parameters);
  if (!model.standardizer.empty()) {
    put_all(model.standardizer.mean);
    put_all(model.standardizer.scale);
  }
  write_text_file(path, blob);
}

LinearSoftmaxModel load_model(const std::string& path) {
  const std::string blob = read_text_file(path);
  if (blob.size() < 12 || std::memcmp(blob.data(), kModelMagic, sizeof kModelMagic) != 0) {
    fail(ErrorCode::format, path + ": not a model file");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint32_t len = bytes[8] | (bytes[9] << 8) | (bytes[10] << 16) | (static_cast<std::uint32_t>(bytes[11]) << 24);
  if (blob.size() < 12 + static_cast<std::size_t>(len)) fail(ErrorCode::format, path + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(12, len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, path + ": bad header: " + e.what());
  }
  LinearSoftmaxModel m;
  try {
    if (header.at("format") != "aet-linear-softmax-v1") fail(ErrorCode::format, path + ": unknown model format");
    m.num_classes = header.at("num_classes").get<int>();
    m.feature_dim = header.at("feature_dim").get<std::size_t>();
    m.loss = parse_loss_kind(header.at("loss").get<std::string>());
    m.fingerprint = header.value("fingerprint", nlohmann::json::object());
    const bool standardized = header.value("standardized", false);
    const std::size_t n_params = static_cast<std::size_t>(m.num_classes) * (m.feature_dim + 1);
    if (header.at("n_parameters").get<std::size_t>() != n_params) fail(ErrorCode::format, path + ": parameter count mismatch");
    const std::size_t n_values = n_params + (standardized ? 2 * m.feature_dim : 0);
    if (blob.size() != 12 + len + 8 * n_values) fail(ErrorCode::format, path + ": payload size mismatch");
    const unsigned char* p = bytes + 12 + len;
    auto take = [&p](std::size_t count) {
      std::vector<double> v(count);
      for (auto& x : v) {
        x = std::bit_cast<double>(get_u64_le(p));
        p += 8;
      }
      return v;
    };
    m.parameters = take(n_params);
    if (standardized) {
      m.standardizer.mean = take(m.feature_dim);
      m.standardizer.scale = take(m.feature_dim);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, path + ": bad header: " + e.what());
  }
  for (double v : m.parameters) {
    if (!std::isfinite(v)) fail(ErrorCode::validation, path + ": non-finite parameter");
  }
  return m;
}

}  // namespace aet
