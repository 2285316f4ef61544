#include "nsorch/drl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace nsorch::drl {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic{'N', 'S', 'O', 'R', 'C', 'H', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void reals(std::span<const double> v) {
    u64(v.size());
    bytes(v.data(), v.size() * sizeof(double));
  }
  void sizes(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (auto s : v) u64(s);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DrlError("checkpoint is truncated");
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v = 0;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t count() {
    const auto n = u64();
    if (n > (1ULL << 32)) throw DrlError("checkpoint length field is implausible");
    return n;
  }
  std::string str() {
    std::string s(count(), '\0');
    bytes(s.data(), s.size());
    return s;
  }
  std::vector<double> reals() {
    std::vector<double> v(count());
    bytes(v.data(), v.size() * sizeof(double));
    return v;
  }
  std::vector<std::size_t> sizes() {
    std::vector<std::size_t> v(count());
    for (auto& s : v) s = u64();
    return v;
  }

 private:
  std::istream& in_;
};

void write_mlp(Writer& w, const Mlp& net) {
  w.sizes(net.sizes());
  w.reals(net.params());
}

Mlp read_mlp(Reader& r) {
  Mlp net(r.sizes());
  const auto p = r.reals();
  if (p.size() != net.n_params()) throw DrlError("checkpoint network parameters do not match its layer sizes");
  auto dst = net.params_mut();
  std::copy(p.begin(), p.end(), dst.begin());
  return net;
}

void write_adam(Writer& w, const AdamState& s) {
  w.f64(s.lr);
  w.f64(s.beta1);
  w.f64(s.beta2);
  w.f64(s.eps);
  w.u64(s.step);
  w.u64(s.rejected);
  w.reals(s.m);
  w.reals(s.v);
}

AdamState read_adam(Reader& r) {
  AdamState s;
  s.lr = r.f64();
  s.beta1 = r.f64();
  s.beta2 = r.f64();
  s.eps = r.f64();
  s.step = r.u64();
  s.rejected = r.u64();
  s.m = r.reals();
  s.v = r.reals();
  if (s.m.size() != s.v.size()) throw DrlError("checkpoint Adam moments differ in length");
  return s;
}

}  // namespace

void write_bundle(std::ostream& out, const AgentBundle& bundle) {
  Writer w(out);
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  const auto& obs = bundle.observation;
  w.f64(obs.rate_scale);
  w.f64(obs.memory_scale);
  w.f64(obs.clip);
  w.sizes(obs.rate_flow_features);
  w.u64(bundle.agents.size());
  for (const auto& [key, agent] : bundle.agents) {
    w.str(key.scope);
    w.u32(static_cast<std::uint32_t>(key.cls));
    w.u32(static_cast<std::uint32_t>(key.kind));
    write_mlp(w, agent.actor);
    write_mlp(w, agent.critic);
    w.f64(agent.log_std);
    write_adam(w, agent.actor_adam);
    write_adam(w, agent.critic_adam);
  }
  if (!out) throw DrlError("failed to write checkpoint");
}

AgentBundle read_bundle(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw DrlError("not a checkpoint file (bad magic)");
  const auto version = r.u32();
  if (version != kVersion) throw DrlError("unsupported checkpoint version " + std::to_string(version));

  AgentBundle b;
  b.observation.rate_scale = r.f64();
  b.observation.memory_scale = r.f64();
  b.observation.clip = r.f64();
  b.observation.rate_flow_features = r.sizes();
  b.observation.validate();
  const auto n = r.count();
  for (std::uint64_t i = 0; i < n; ++i) {
    AgentKey key;
    key.scope = r.str();
    const auto cls = r.u32();
    const auto kind = r.u32();
    if (cls > 1 || kind > 2) throw DrlError("checkpoint agent role is invalid");
    key.cls = static_cast<SliceClass>(cls);
    key.kind = static_cast<AllocationKind>(kind);
    Agent a;
    a.role = {key.cls, key.kind};
    a.actor = read_mlp(r);
    a.critic = read_mlp(r);
    a.log_std = r.f64();
    a.actor_adam = read_adam(r);
    a.critic_adam = read_adam(r);
    const std::size_t in_size = b.observation.input_size(key.kind);
    if (a.actor.input_size() != in_size || a.critic.input_size() != in_size || a.actor.output_size() != 1 ||
        a.critic.output_size() != 1) {
      throw DrlError("checkpoint agent " + to_string(key) + " has layer sizes inconsistent with its role");
    }
    if (a.actor_adam.m.size() != a.actor.n_params() + 1 || a.critic_adam.m.size() != a.critic.n_params()) {
      throw DrlError("checkpoint agent " + to_string(key) + " has Adam state of the wrong size");
    }
    if (!b.agents.emplace(key, std::move(a)).second) throw DrlError("duplicate agent in checkpoint");
  }
  return b;
}

void save_bundle(const std::string& path, const AgentBundle& bundle) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DrlError("cannot open checkpoint for writing: " + path);
  write_bundle(out, bundle);
}

AgentBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DrlError("cannot open checkpoint: " + path);
  try {
    return read_bundle(in);
  } catch (const DrlError& e) {
    throw DrlError(path + ": " + e.what());
  }
}

}  // namespace nsorch::drl
