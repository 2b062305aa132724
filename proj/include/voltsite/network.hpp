#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "voltsite/rng.hpp"

namespace voltsite {

// Fully-connected net: ReLU hidden layers, linear output. Batches are rows.
// All arithmetic is double; two nets built from the same seed are identical.
class Network {
 public:
  explicit Network(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("Network: need at least two layer dims");
    for (int d : dims_)
      if (d <= 0) throw std::invalid_argument("Network: layer dims must be positive");
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      weights_.emplace_back(Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l]));
      biases_.emplace_back(Eigen::VectorXd::Zero(dims_[l + 1]));
    }
  }

  // Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases zero.
  static Network glorot(std::vector<int> dims, std::uint64_t seed) {
    Network net(std::move(dims));
    Rng rng = Rng(seed).stream("init");
    for (std::size_t l = 0; l < net.weights_.size(); ++l) {
      double a = std::sqrt(6.0 / (net.dims_[l] + net.dims_[l + 1]));
      auto& W = net.weights_[l];
      for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = rng.uniform(-a, a);
    }
    return net;
  }

  int input_size() const { return dims_.front(); }
  int output_size() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t layer_count() const { return weights_.size(); }
  Eigen::MatrixXd& weights(std::size_t l) { return weights_[l]; }
  const Eigen::MatrixXd& weights(std::size_t l) const { return weights_[l]; }
  Eigen::VectorXd& biases(std::size_t l) { return biases_[l]; }
  const Eigen::VectorXd& biases(std::size_t l) const { return biases_[l]; }

  struct Trace {
    Eigen::MatrixXd input;                // N x in
    std::vector<Eigen::MatrixXd> pre;     // per layer, N x out_l
    std::vector<Eigen::MatrixXd> act;     // post-activation
  };

  struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;

    bool finite() const {
      for (const auto& m : dW)
        if (!m.allFinite()) return false;
      for (const auto& v : db)
        if (!v.allFinite()) return false;
      return true;
    }
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const {
    check_input(X);
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::MatrixXd z = (a * weights_[l].transpose()).rowwise() + biases_[l].transpose();
      a = (l + 1 < weights_.size()) ? z.cwiseMax(0.0) : z;
    }
    return a;
  }

  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd out = forward(x.transpose());
    return out.row(0).transpose();
  }

  Trace forward_trace(const Eigen::MatrixXd& X) const {
    check_input(X);
    Trace t;
    t.input = X;
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::MatrixXd z = (a * weights_[l].transpose()).rowwise() + biases_[l].transpose();
      t.pre.push_back(z);
      a = (l + 1 < weights_.size()) ? z.cwiseMax(0.0) : z;
      t.act.push_back(a);
    }
    return t;
  }

  // Gradients of a scalar loss whose d(loss)/d(output) is dY, for every
  // parameter. The trace must come from forward_trace on this network.
  Gradients backward(const Trace& trace, const Eigen::MatrixXd& dY) const {
    if (trace.pre.size() != weights_.size() || trace.input.cols() != dims_.front())
      throw std::invalid_argument("backward: trace does not match this network");
    for (std::size_t l = 0; l < weights_.size(); ++l)
      if (trace.pre[l].cols() != dims_[l + 1] || trace.pre[l].rows() != trace.input.rows())
        throw std::invalid_argument("backward: trace does not match this network");
    if (dY.rows() != trace.input.rows() || dY.cols() != dims_.back())
      throw std::invalid_argument("backward: output gradient has wrong shape");
    Gradients g;
    g.dW.resize(weights_.size());
    g.db.resize(weights_.size());
    Eigen::MatrixXd dZ = dY;
    for (std::size_t li = weights_.size(); li-- > 0;) {
      const Eigen::MatrixXd& below = li == 0 ? trace.input : trace.act[li - 1];
      g.dW[li] = dZ.transpose() * below;
      g.db[li] = dZ.colwise().sum().transpose();
      if (li > 0) {
        Eigen::MatrixXd dA = dZ * weights_[li];
        dZ = dA.cwiseProduct(
            (trace.pre[li - 1].array() > 0.0).cast<double>().matrix());
      }
    }
    return g;
  }

  bool all_finite() const {
    for (const auto& W : weights_)
      if (!W.allFinite()) return false;
    for (const auto& b : biases_)
      if (!b.allFinite()) return false;
    return true;
  }

 private:
  void check_input(const Eigen::MatrixXd& X) const {
    if (X.cols() != dims_.front())
      throw std::invalid_argument("forward: input width " + std::to_string(X.cols()) +
                                  " != state size " + std::to_string(dims_.front()));
  }

  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// The architecture used by both Q-networks: input -> 256 -> 128 -> 64 -> output.
inline std::vector<int> q_network_dims(int state_size, int action_size) {
  return {state_size, 256, 128, 64, action_size};
}

// Adaptive-moment gradient descent (beta1 0.9, beta2 0.999) with bias
// correction. Owns the per-parameter moment accumulators.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const Network& net, double lr) : lr_(lr) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      m_w_.push_back(Eigen::MatrixXd::Zero(net.weights(l).rows(), net.weights(l).cols()));
      v_w_.push_back(Eigen::MatrixXd::Zero(net.weights(l).rows(), net.weights(l).cols()));
      m_b_.push_back(Eigen::VectorXd::Zero(net.biases(l).size()));
      v_b_.push_back(Eigen::VectorXd::Zero(net.biases(l).size()));
    }
  }

  void update(Network& net, const Network::Gradients& grads) {
    if (grads.dW.size() != m_w_.size())
      throw std::invalid_argument("update: gradient shape mismatch");
    if (!grads.finite())
      throw std::runtime_error("update rejected: non-finite gradient");
    ++step_;
    double c1 = 1.0 - std::pow(beta1_, step_);
    double c2 = 1.0 - std::pow(beta2_, step_);
    for (std::size_t l = 0; l < m_w_.size(); ++l) {
      m_w_[l] = beta1_ * m_w_[l] + (1.0 - beta1_) * grads.dW[l];
      v_w_[l] = beta2_ * v_w_[l] + (1.0 - beta2_) * grads.dW[l].cwiseProduct(grads.dW[l]);
      net.weights(l).array() -=
          lr_ * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + eps_);
      m_b_[l] = beta1_ * m_b_[l] + (1.0 - beta1_) * grads.db[l];
      v_b_[l] = beta2_ * v_b_[l] + (1.0 - beta2_) * grads.db[l].cwiseProduct(grads.db[l]);
      net.biases(l).array() -=
          lr_ * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + eps_);
    }
  }

  long step_count() const { return step_; }
  double learning_rate() const { return lr_; }

  friend void adam_to_json(nlohmann::json&, const AdamOptimizer&);
  friend AdamOptimizer adam_from_json(const nlohmann::json&, const Network&);

 private:
  double lr_ = 0.001;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long step_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

// target <- tau * online + (1 - tau) * target, elementwise.
inline void soft_update(Network& target, const Network& online, double tau) {
  if (target.dims() != online.dims())
    throw std::invalid_argument("soft_update: network shapes differ");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in (0,1]");
  for (std::size_t l = 0; l < target.layer_count(); ++l) {
    target.weights(l) = tau * online.weights(l) + (1.0 - tau) * target.weights(l);
    target.biases(l) = tau * online.biases(l) + (1.0 - tau) * target.biases(l);
  }
}

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  return flat;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                        Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  if (static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw std::invalid_argument("checkpoint: matrix size mismatch");
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[k++].get<double>();
  return m;
}

}  // namespace detail

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["dims"] = net.dims();
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    j["weights"].push_back(detail::matrix_to_json(net.weights(l)));
    j["biases"].push_back(detail::matrix_to_json(net.biases(l)));
  }
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  Network net(j.at("dims").get<std::vector<int>>());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    net.weights(l) = detail::matrix_from_json(j.at("weights")[l], net.weights(l).rows(),
                                              net.weights(l).cols());
    net.biases(l) =
        detail::matrix_from_json(j.at("biases")[l], net.biases(l).size(), 1);
  }
  return net;
}

inline void adam_to_json(nlohmann::json& j, const AdamOptimizer& opt) {
  j["lr"] = opt.lr_;
  j["beta1"] = opt.beta1_;
  j["beta2"] = opt.beta2_;
  j["eps"] = opt.eps_;
  j["step"] = opt.step_;
  j["m_w"] = nlohmann::json::array();
  j["v_w"] = nlohmann::json::array();
  j["m_b"] = nlohmann::json::array();
  j["v_b"] = nlohmann::json::array();
  for (std::size_t l = 0; l < opt.m_w_.size(); ++l) {
    j["m_w"].push_back(detail::matrix_to_json(opt.m_w_[l]));
    j["v_w"].push_back(detail::matrix_to_json(opt.v_w_[l]));
    j["m_b"].push_back(detail::matrix_to_json(opt.m_b_[l]));
    j["v_b"].push_back(detail::matrix_to_json(opt.v_b_[l]));
  }
}

inline AdamOptimizer adam_from_json(const nlohmann::json& j, const Network& net) {
  AdamOptimizer opt(net, j.at("lr").get<double>());
  opt.beta1_ = j.at("beta1").get<double>();
  opt.beta2_ = j.at("beta2").get<double>();
  opt.eps_ = j.at("eps").get<double>();
  opt.step_ = j.at("step").get<long>();
  for (std::size_t l = 0; l < opt.m_w_.size(); ++l) {
    opt.m_w_[l] = detail::matrix_from_json(j.at("m_w")[l], opt.m_w_[l].rows(), opt.m_w_[l].cols());
    opt.v_w_[l] = detail::matrix_from_json(j.at("v_w")[l], opt.v_w_[l].rows(), opt.v_w_[l].cols());
    opt.m_b_[l] = detail::matrix_from_json(j.at("m_b")[l], opt.m_b_[l].size(), 1);
    opt.v_b_[l] = detail::matrix_from_json(j.at("v_b")[l], opt.v_b_[l].size(), 1);
  }
  return opt;
}

}  // namespace voltsite
