#include "uavnav/nn.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>

namespace uavnav {
namespace {

std::uint64_t next_tag() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

Eigen::MatrixXd relu(Eigen::MatrixXd z) {
  return z.cwiseMax(0.0);
}

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("Mlp: layer dims must be positive");
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> dims, OutputActivation out_act, Rng& rng)
    : dims_(std::move(dims)), out_act_(out_act), tag_(next_tag()) {
  check_dims(dims_);
  const std::size_t layers = dims_.size() - 1;
  w_.reserve(layers);
  b_.reserve(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    const int fan_in = dims_[i];
    const int fan_out = dims_[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    }
    Eigen::VectorXd b(fan_out);
    for (int r = 0; r < fan_out; ++r) b(r) = dist(rng);
    w_.push_back(std::move(w));
    b_.push_back(std::move(b));
  }
}

Mlp::Mlp(const Mlp& other)
    : dims_(other.dims_), out_act_(other.out_act_), w_(other.w_), b_(other.b_),
      tag_(next_tag()) {}

Mlp& Mlp::operator=(const Mlp& other) {
  if (this != &other) {
    dims_ = other.dims_;
    out_act_ = other.out_act_;
    w_ = other.w_;
    b_ = other.b_;
    tag_ = next_tag();
  }
  return *this;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    n += static_cast<std::size_t>(w_[i].size()) + static_cast<std::size_t>(b_[i].size());
  }
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Tape tape;
  return forward(x, tape);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape& tape) const {
  if (w_.empty()) throw std::logic_error("Mlp::forward: uninitialized net");
  if (x.cols() != dims_.front()) throw std::invalid_argument("Mlp::forward: input width mismatch");
  tape.acts.clear();
  tape.acts.reserve(w_.size() + 1);
  tape.net_tag = tag_;
  tape.acts.push_back(x);
  for (std::size_t i = 0; i < w_.size(); ++i) {
    Eigen::MatrixXd z = tape.acts.back() * w_[i].transpose();
    z.rowwise() += b_[i].transpose();
    if (i + 1 < w_.size()) {
      tape.acts.push_back(relu(std::move(z)));
    } else if (out_act_ == OutputActivation::Tanh) {
      tape.acts.push_back(z.array().tanh().matrix());
    } else {
      tape.acts.push_back(std::move(z));
    }
  }
  return tape.acts.back();
}

Gradients Mlp::backward(const Tape& tape, const Eigen::MatrixXd& dy,
                        Eigen::MatrixXd* dx) const {
  if (tape.net_tag != tag_) {
    throw std::logic_error("Mlp::backward: tape was recorded by a different net");
  }
  if (tape.acts.size() != w_.size() + 1) {
    throw std::logic_error("Mlp::backward: tape depth mismatch");
  }
  const Eigen::MatrixXd& y = tape.acts.back();
  if (dy.rows() != y.rows() || dy.cols() != y.cols()) {
    throw std::invalid_argument("Mlp::backward: dy shape mismatch");
  }

  Gradients g;
  g.dw.resize(w_.size());
  g.db.resize(w_.size());

  Eigen::MatrixXd delta;
  if (out_act_ == OutputActivation::Tanh) {
    delta = dy.cwiseProduct((1.0 - y.array().square()).matrix());
  } else {
    delta = dy;
  }
  for (std::size_t i = w_.size(); i-- > 0;) {
    g.dw[i] = delta.transpose() * tape.acts[i];
    g.db[i] = delta.colwise().sum().transpose();
    if (i > 0) {
      // ReLU mask recovered from the stored post-activation: a > 0 iff z > 0.
      delta = (delta * w_[i]).cwiseProduct(
          (tape.acts[i].array() > 0.0).cast<double>().matrix());
    } else if (dx != nullptr) {
      *dx = delta * w_[0];
    }
  }
  return g;
}

AdamState::AdamState(const Mlp& net) {
  m_w.reserve(net.layer_count());
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    m_w.push_back(Eigen::MatrixXd::Zero(net.weight(i).rows(), net.weight(i).cols()));
    v_w.push_back(Eigen::MatrixXd::Zero(net.weight(i).rows(), net.weight(i).cols()));
    m_b.push_back(Eigen::VectorXd::Zero(net.bias(i).size()));
    v_b.push_back(Eigen::VectorXd::Zero(net.bias(i).size()));
  }
}

void adam_step(Mlp& net, const Gradients& g, AdamState& st, const AdamConfig& cfg) {
  if (g.dw.size() != net.layer_count() || st.m_w.size() != net.layer_count()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++st.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    st.m_w[i] = cfg.beta1 * st.m_w[i] + (1.0 - cfg.beta1) * g.dw[i];
    st.v_w[i] = (cfg.beta2 * st.v_w[i].array() + (1.0 - cfg.beta2) * g.dw[i].array().square())
                    .matrix();
    net.weight(i).array() -=
        cfg.lr * (st.m_w[i].array() / bc1) / ((st.v_w[i].array() / bc2).sqrt() + cfg.eps);
    st.m_b[i] = cfg.beta1 * st.m_b[i] + (1.0 - cfg.beta1) * g.db[i];
    st.v_b[i] = (cfg.beta2 * st.v_b[i].array() + (1.0 - cfg.beta2) * g.db[i].array().square())
                    .matrix();
    net.bias(i).array() -=
        cfg.lr * (st.m_b[i].array() / bc1) / ((st.v_b[i].array() / bc2).sqrt() + cfg.eps);
  }
}

void polyak_update(Mlp& target, const Mlp& online, double tau) {
  if (target.dims() != online.dims()) {
    throw std::invalid_argument("polyak_update: net shapes differ");
  }
  for (std::size_t i = 0; i < target.layer_count(); ++i) {
    target.weight(i) = tau * online.weight(i) + (1.0 - tau) * target.weight(i);
    target.bias(i) = tau * online.bias(i) + (1.0 - tau) * target.bias(i);
  }
}

void round_to_f32(Mlp& net) {
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    net.weight(i) = net.weight(i).cast<float>().cast<double>();
    net.bias(i) = net.bias(i).cast<float>().cast<double>();
  }
}

Td3Nets make_td3_nets(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng) {
  auto stack = [&](int in, int out) {
    std::vector<int> dims;
    dims.push_back(in);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
  };
  Td3Nets nets;
  nets.actor = Mlp(stack(obs_dim, act_dim), OutputActivation::Tanh, rng);
  nets.critic1 = Mlp(stack(obs_dim + act_dim, 1), OutputActivation::Identity, rng);
  nets.critic2 = Mlp(stack(obs_dim + act_dim, 1), OutputActivation::Identity, rng);
  nets.actor_target = nets.actor;
  nets.critic1_target = nets.critic1;
  nets.critic2_target = nets.critic2;
  return nets;
}

namespace {

constexpr char kMagic[4] = {'M', 'P', 'T', '3'};
constexpr std::uint16_t kVersion = 1;

static_assert(sizeof(float) == 4, "checkpoint format assumes 4-byte float");

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointError("checkpoint truncated");
  return v;
}

void write_net(std::ostream& os, const Mlp& net) {
  write_pod(os, static_cast<std::uint16_t>(net.dims().size()));
  for (int d : net.dims()) write_pod(os, static_cast<std::uint32_t>(d));
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const auto& w = net.weight(i);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        write_pod(os, static_cast<float>(w(r, c)));
      }
    }
    const auto& b = net.bias(i);
    for (Eigen::Index r = 0; r < b.size(); ++r) write_pod(os, static_cast<float>(b(r)));
  }
}

Mlp read_net(std::istream& is, OutputActivation out_act) {
  const auto n_dims = read_pod<std::uint16_t>(is);
  if (n_dims < 2 || n_dims > 64) throw CheckpointError("checkpoint has invalid layer count");
  std::vector<int> dims(n_dims);
  for (auto& d : dims) {
    const auto v = read_pod<std::uint32_t>(is);
    if (v == 0 || v > (1u << 20)) throw CheckpointError("checkpoint has invalid layer width");
    d = static_cast<int>(v);
  }
  Rng scratch(0);
  Mlp net(dims, out_act, scratch);
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    auto& w = net.weight(i);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = static_cast<double>(read_pod<float>(is));
      }
    }
    auto& b = net.bias(i);
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      b(r) = static_cast<double>(read_pod<float>(is));
    }
  }
  return net;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Td3Nets& nets) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_net(os, nets.actor);
  write_net(os, nets.critic1);
  write_net(os, nets.critic2);
  write_net(os, nets.actor_target);
  write_net(os, nets.critic1_target);
  write_net(os, nets.critic2_target);
  os.flush();
  if (!os) throw CheckpointError("checkpoint write failed: " + path.string());
}

Td3Nets load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path.string());
  char magic[4];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file: " + path.string());
  }
  const auto version = read_pod<std::uint16_t>(is);
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Td3Nets nets;
  nets.actor = read_net(is, OutputActivation::Tanh);
  nets.critic1 = read_net(is, OutputActivation::Identity);
  nets.critic2 = read_net(is, OutputActivation::Identity);
  nets.actor_target = read_net(is, OutputActivation::Tanh);
  nets.critic1_target = read_net(is, OutputActivation::Identity);
  nets.critic2_target = read_net(is, OutputActivation::Identity);
  is.peek();
  if (!is.eof()) throw CheckpointError("trailing bytes after checkpoint payload");
  return nets;
}

}  // namespace uavnav
