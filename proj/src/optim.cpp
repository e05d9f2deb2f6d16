#include "gmmpc/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "gmmpc/error.hpp"
#include "gmmpc/eval.hpp"

namespace gmmpc {

namespace {

constexpr double kRidge = 1e-9;
constexpr double kMinBranchMass = 1e-10;

double log_sum(std::span<const double> terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - hi);
  return hi + std::log(s);
}

}  // namespace

Optimizer parse_optimizer(std::string_view s) {
  if (s == "adam") return Optimizer::adam;
  if (s == "full-em" || s == "full_em") return Optimizer::full_em;
  throw Error(ErrorCode::invalid_argument,
              "unknown optimizer '" + std::string(s) + "' (expected adam or full-em)");
}

std::string_view to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "full-em"; }

void TrainConfig::validate(Link link) const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "learning_rate must be > 0");
  if (batch_size < 1) throw Error(ErrorCode::invalid_argument, "batch_size must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw Error(ErrorCode::invalid_argument, "Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw Error(ErrorCode::invalid_argument, "adam_eps must be > 0");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be >= 0");
  if (optimizer == Optimizer::full_em && link != Link::linear)
    throw Error(ErrorCode::unsupported,
                "full-em needs the linear link: the closed-form weight/bias/variance updates "
                "only exist for linear branch means");
}

std::size_t parameter_count_flat(const BnModel& bn) {
  std::size_t n = 0;
  for (const auto& nm : bn.nodes)
    for (const auto& br : nm.branches) n += br.weights.size() + 2;
  return n;
}

std::vector<double> pack_parameters(const BnModel& bn) {
  std::vector<double> flat;
  flat.reserve(parameter_count_flat(bn));
  for (const auto& nm : bn.nodes)
    for (const auto& br : nm.branches) {
      flat.insert(flat.end(), br.weights.begin(), br.weights.end());
      flat.push_back(br.bias);
      flat.push_back(br.log_var);
    }
  return flat;
}

void unpack_parameters(BnModel& bn, std::span<const double> flat) {
  if (flat.size() != parameter_count_flat(bn))
    throw Error(ErrorCode::invalid_argument, "parameter vector has the wrong length");
  std::size_t i = 0;
  for (auto& nm : bn.nodes)
    for (auto& br : nm.branches) {
      for (double& w : br.weights) w = flat[i++];
      br.bias = flat[i++];
      br.log_var = flat[i++];
    }
}

std::string describe_parameter(const BnModel& bn, std::size_t index) {
  std::size_t i = 0;
  for (const auto& nm : bn.nodes)
    for (std::size_t b = 0; b < nm.size(); ++b) {
      const auto& br = nm.branches[b];
      const std::size_t span = br.weights.size() + 2;
      if (index < i + span) {
        std::ostringstream os;
        os << "node '" << bn.dag.name(nm.node) << "' branch " << b << ' ';
        const std::size_t local = index - i;
        if (local < br.weights.size())
          os << "weight on '" << bn.dag.name(br.inputs[local]) << "'";
        else if (local == br.weights.size())
          os << "bias";
        else
          os << "log-variance";
        return os.str();
      }
      i += span;
    }
  return "parameter " + std::to_string(index) + " (out of range)";
}

std::vector<double> loss_gradient(const BnModel& bn, const Dataset& aligned,
                                  std::span<const std::size_t> rows, double epsilon) {
  std::vector<double> grad(parameter_count_flat(bn), 0.0);
  std::vector<std::size_t> offset;
  std::vector<double> terms;
  std::vector<double> means;
  std::vector<double> zs;
  const double log_eps = epsilon > 0.0 ? std::log(epsilon) : -std::numeric_limits<double>::infinity();

  for (std::size_t r : rows) {
    const auto row = aligned.row(r);
    std::size_t base = 0;
    for (const auto& nm : bn.nodes) {
      const std::size_t k = nm.size();
      const double x = row[nm.node];
      terms.resize(k);
      means.resize(k);
      zs.resize(k);
      for (std::size_t b = 0; b < k; ++b) {
        const auto& br = nm.branches[b];
        double z = 0.0;
        for (std::size_t i = 0; i < br.inputs.size(); ++i) z += br.weights[i] * row[br.inputs[i]];
        zs[b] = z;
        means[b] = (nm.link == Link::linear ? z : sigmoid(z)) + br.bias;
        const double res = x - means[b];
        const double lp = -0.91893853320467274178 - 0.5 * br.log_var -
                          0.5 * res * res * std::exp(-br.log_var);
        terms[b] = nm.pi[b] > 0.0 ? std::log(nm.pi[b]) + lp
                                  : -std::numeric_limits<double>::infinity();
      }
      double denom = log_sum(terms);
      if (epsilon > 0.0) {
        const double hi = std::max(denom, log_eps);
        const double lo = std::min(denom, log_eps);
        denom = hi + std::log1p(std::exp(lo - hi));
      }
      std::size_t at = base;
      for (std::size_t b = 0; b < k; ++b) {
        const auto& br = nm.branches[b];
        const double gamma = std::exp(terms[b] - denom);
        const double inv_var = std::exp(-br.log_var);
        const double res = x - means[b];
        // dL/dmean for this branch.
        const double g_mean = -gamma * res * inv_var;
        double dz = 1.0;
        if (nm.link == Link::sigmoid) {
          const double s = sigmoid(zs[b]);
          dz = s * (1.0 - s);
        }
        for (std::size_t i = 0; i < br.inputs.size(); ++i)
          grad[at + i] += g_mean * dz * row[br.inputs[i]];
        grad[at + br.inputs.size()] += g_mean;
        grad[at + br.inputs.size() + 1] += -gamma * (0.5 * res * res * inv_var - 0.5);
        at += br.weights.size() + 2;
      }
      base = at;
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i]))
      throw Error(ErrorCode::numeric, "non-finite gradient for " + describe_parameter(bn, i));
  return grad;
}

void adam_step(std::span<double> params, AdamState& state, std::span<const double> gradient,
               const AdamSettings& s) {
  if (params.size() != gradient.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw Error(ErrorCode::invalid_argument, "Adam state/gradient dimension mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = gradient[i];
    state.m[i] = s.beta1 * state.m[i] + (1.0 - s.beta1) * g;
    state.v[i] = s.beta2 * state.v[i] + (1.0 - s.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

double Responsibilities::at(NodeId v, std::size_t row, std::size_t k) const {
  const std::size_t width = per_node[v].size() / std::max<std::size_t>(rows, 1);
  return per_node[v][row * width + k];
}

Responsibilities compute_responsibilities(const BnModel& bn, const Dataset& aligned,
                                          double epsilon) {
  Responsibilities out;
  out.rows = aligned.rows();
  out.per_node.resize(bn.nodes.size());
  for (const auto& nm : bn.nodes) {
    auto& g = out.per_node[nm.node];
    g.reserve(aligned.rows() * nm.size());
    for (std::size_t r = 0; r < aligned.rows(); ++r) {
      const auto gamma = responsibilities_row(nm, aligned.row(r), epsilon);
      g.insert(g.end(), gamma.begin(), gamma.end());
    }
  }
  return out;
}

void em_pi_update(BnModel& bn, const Dataset& aligned, double epsilon) {
  const std::size_t n = aligned.rows();
  if (n == 0) throw Error(ErrorCode::data, "coefficient update needs a non-empty dataset");
  for (auto& nm : bn.nodes) {
    if (nm.size() == 1) {
      nm.pi = {1.0};
      continue;
    }
    std::vector<double> mass(nm.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto gamma = responsibilities_row(nm, aligned.row(r), epsilon);
      for (std::size_t k = 0; k < nm.size(); ++k) mass[k] += gamma[k];
    }
    std::vector<double> pi(nm.size());
    double total = 0.0;
    for (std::size_t k = 0; k < nm.size(); ++k) {
      pi[k] = mass[k] / static_cast<double>(n);
      total += pi[k];
    }
    if (!(total > 0.0) || !std::isfinite(total)) continue;
    for (double& p : pi) p /= total;
    nm.pi = std::move(pi);
  }
}

void closed_form_mstep(BnModel& bn, const Dataset& aligned, const Responsibilities& gamma) {
  if (gamma.rows != aligned.rows())
    throw Error(ErrorCode::invalid_argument, "responsibilities do not match the dataset");
  const std::size_t n = aligned.rows();
  for (auto& nm : bn.nodes) {
    if (nm.link != Link::linear)
      throw Error(ErrorCode::unsupported, "closed-form M-step needs the linear link");
    for (std::size_t k = 0; k < nm.size(); ++k) {
      auto& br = nm.branches[k];
      const std::size_t d = br.inputs.size() + 1;
      Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(d, d);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
      Eigen::VectorXd z(d);
      double mass = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double g = gamma.at(nm.node, r, k);
        if (g == 0.0) continue;
        const auto row = aligned.row(r);
        for (std::size_t i = 0; i < br.inputs.size(); ++i) z[i] = row[br.inputs[i]];
        z[d - 1] = 1.0;
        normal.selfadjointView<Eigen::Lower>().rankUpdate(z, g);
        rhs += g * row[nm.node] * z;
        mass += g;
      }
      if (mass < kMinBranchMass) continue;
      normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
      normal.diagonal().array() += kRidge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
      Eigen::VectorXd sol = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !sol.allFinite())
        throw Error(ErrorCode::numeric, "singular normal equations for node '" +
                                            bn.dag.name(nm.node) + "' branch " +
                                            std::to_string(k));
      for (std::size_t i = 0; i < br.inputs.size(); ++i) br.weights[i] = sol[i];
      br.bias = sol[d - 1];

      double sq = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double g = gamma.at(nm.node, r, k);
        if (g == 0.0) continue;
        const auto row = aligned.row(r);
        const double res = row[nm.node] - branch_mean_row(br, row, Link::linear);
        sq += g * res * res;
      }
      br.log_var = std::log(std::max(sq / mass, kVarianceFloor));
    }
  }
}

DioTrainer::DioTrainer(BnModel& bn, const Dataset& train, TrainConfig config)
    : bn_(bn),
      data_(align_to_graph(train, bn.dag)),
      config_(config),
      adam_(parameter_count_flat(bn)),
      all_rows_(data_.rows()) {
  config_.validate(bn.link);
  for (const auto& nm : bn.nodes)
    if (config_.optimizer == Optimizer::full_em && nm.link != Link::linear)
      throw Error(ErrorCode::unsupported, "full-em needs the linear link");
  std::iota(all_rows_.begin(), all_rows_.end(), 0);
}

void DioTrainer::update_coefficients() { em_pi_update(bn_, data_, config_.epsilon); }

void DioTrainer::descend() {
  if (config_.optimizer == Optimizer::full_em) {
    closed_form_mstep(bn_, data_, compute_responsibilities(bn_, data_, config_.epsilon));
    return;
  }
  const AdamSettings settings{config_.learning_rate, config_.adam_beta1, config_.adam_beta2,
                              config_.adam_eps};
  const double min_log_var = std::log(kVarianceFloor);
  std::vector<double> flat = pack_parameters(bn_);
  for (std::size_t inner = 0; inner < config_.inner_iterations; ++inner) {
    for (const auto& batch : minibatches(data_.rows(), config_.batch_size, config_.seed, pass_)) {
      const auto grad = loss_gradient(bn_, data_, batch, config_.epsilon);
      adam_step(flat, adam_, grad, settings);
      unpack_parameters(bn_, flat);
      for (auto& nm : bn_.nodes)
        for (auto& br : nm.branches) br.log_var = std::max(br.log_var, min_log_var);
      flat = pack_parameters(bn_);
    }
    ++pass_;
  }
}

void DioTrainer::outer_epoch() {
  update_coefficients();
  descend();
}

double DioTrainer::loss(double epsilon) const {
  return batch_loss(bn_, data_, all_rows_, epsilon);
}

TrainResult dio_train(BnModel bn, const Dataset& data, const TrainConfig& config,
                      const Dataset* validation, const EpochCallback& on_epoch) {
  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  {
    std::ostringstream os;
    os << config.inner_iterations << "×" << config.outer_iterations;
    report.epochs = os.str();
  }
  DioTrainer trainer(bn, data, config);
  std::optional<Dataset> val;
  if (validation) val = align_to_graph(*validation, bn.dag);
  EarlyStopping stopper(std::max<std::size_t>(config.patience, 1));
  std::optional<BnModel> best;

  for (std::size_t outer = 1; outer <= config.outer_iterations; ++outer) {
    trainer.outer_epoch();
    const double loss = trainer.loss(config.epsilon);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::numeric,
                  "training loss became non-finite in outer epoch " + std::to_string(outer));
    report.loss_per_outer_epoch.push_back(loss);
    EpochRecord rec{outer, loss, std::nullopt};
    bool stop = false;
    if (val) {
      const double v = avg_minus_loglik(bn, *val, 0.0);
      rec.val_avg_nll = v;
      report.val_avg_nll_per_outer_epoch.push_back(v);
      stop = stopper.update(v);
      if (stopper.improved()) best = bn;
    }
    if (on_epoch) on_epoch(rec);
    if (stop && outer < config.outer_iterations) {
      report.stopped_early = true;
      break;
    }
  }

  if (val && best) {
    bn = std::move(*best);
    report.best_outer_epoch = stopper.best_epoch();
  } else {
    report.best_outer_epoch = report.loss_per_outer_epoch.size();
  }
  // trainer still refers to `bn`, which now holds the returned model.
  report.final_train_loss = trainer.loss(config.epsilon);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(bn), std::move(report)};
}

}  // namespace gmmpc
