#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavnav/world.hpp"

namespace uavnav {

enum class OutputActivation { Tanh, Identity };

/// Parameter gradients shaped like the network that produced them.
struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

/// Activations recorded by a forward pass. acts[0] is the input batch,
/// acts[i+1] the output of layer i after its activation. The tag binds the
/// tape to the parameter set it was produced with.
struct Tape {
  std::vector<Eigen::MatrixXd> acts;
  std::uint64_t net_tag = 0;
};

/// Fully connected net, ReLU hidden layers, rows are samples. Weights are
/// double in memory; checkpoints store them as 32-bit floats.
class Mlp {
 public:
  Mlp() = default;
  /// dims = {in, hidden..., out}; weights and biases drawn uniformly from
  /// +-1/sqrt(fan_in), weights row-major first, then the bias, layer by layer.
  Mlp(std::vector<int> dims, OutputActivation out_act, Rng& rng);

  Mlp(const Mlp& other);             // copies get a fresh tag
  Mlp& operator=(const Mlp& other);  // (a tape never outlives its exact net)
  Mlp(Mlp&&) noexcept = default;
  Mlp& operator=(Mlp&&) noexcept = default;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape& tape) const;

  /// Reverse pass for dLoss/dOutput `dy`; optionally also yields dLoss/dInput.
  /// Throws std::logic_error when the tape was recorded by a different net.
  Gradients backward(const Tape& tape, const Eigen::MatrixXd& dy,
                     Eigen::MatrixXd* dx = nullptr) const;

  const std::vector<int>& dims() const { return dims_; }
  OutputActivation output_activation() const { return out_act_; }
  std::size_t layer_count() const { return w_.size(); }
  const Eigen::MatrixXd& weight(std::size_t i) const { return w_[i]; }
  const Eigen::VectorXd& bias(std::size_t i) const { return b_[i]; }
  Eigen::MatrixXd& weight(std::size_t i) { return w_[i]; }
  Eigen::VectorXd& bias(std::size_t i) { return b_[i]; }
  std::uint64_t tag() const { return tag_; }
  std::size_t parameter_count() const;

 private:
  std::vector<int> dims_;
  OutputActivation out_act_ = OutputActivation::Identity;
  std::vector<Eigen::MatrixXd> w_;  // out x in
  std::vector<Eigen::VectorXd> b_;
  std::uint64_t tag_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment accumulators plus the shared step counter.
struct AdamState {
  explicit AdamState(const Mlp& net);
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long t = 0;
};

/// Bias-corrected update in place. Gradient shapes must match the net.
void adam_step(Mlp& net, const Gradients& g, AdamState& st, const AdamConfig& cfg);

/// target <- tau*online + (1-tau)*target, elementwise.
void polyak_update(Mlp& target, const Mlp& online, double tau);

/// Round every parameter through 32-bit float, the checkpoint precision.
void round_to_f32(Mlp& net);

struct Td3Nets {
  Mlp actor;
  Mlp critic1;
  Mlp critic2;
  Mlp actor_target;
  Mlp critic1_target;
  Mlp critic2_target;
};

/// Actor obs->act with tanh output; critics (obs+act)->1, identity output.
/// Targets start as exact copies.
Td3Nets make_td3_nets(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng);

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Binary format: "MPT3", u16 version (1), then six net blocks in the order
/// actor, critic1, critic2, actor_target, critic1_target, critic2_target.
/// Each block: u16 dim count, u32 dims, then per layer the weight matrix
/// row-major followed by the bias, all little-endian f32. Output activations
/// are positional (actor nets tanh, critic nets identity).
void save_checkpoint(const std::filesystem::path& path, const Td3Nets& nets);

/// Throws CheckpointError on missing file, bad magic/version, or truncation.
Td3Nets load_checkpoint(const std::filesystem::path& path);

}  // namespace uavnav
