#include "ebrake/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ebrake {

namespace {

constexpr const char* kMagic = "ebrake-policy";
constexpr int kVersion = 1;

std::string hex(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", value);
  return buf;
}

double parse_hex(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw CheckpointError("bad parameter value '" + token + "'");
  }
  return v;
}

}  // namespace

void save_policy(std::ostream& out, const PolicyNetwork& policy) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "head " << to_string(policy.head()) << '\n';
  out << "layers";
  for (int s : policy.body().sizes()) out << ' ' << s;
  out << '\n';
  const Eigen::VectorXd flat = policy.flat();
  out << "parameters " << flat.size() << '\n';
  for (Eigen::Index i = 0; i < flat.size(); ++i) out << hex(flat(i)) << '\n';
}

PolicyNetwork load_policy(std::istream& in) {
  std::string line;
  std::string word;
  int version = 0;
  if (!std::getline(in, line)) throw CheckpointError("empty checkpoint");
  {
    std::istringstream ls(line);
    if (!(ls >> word >> version) || word != kMagic) throw CheckpointError("not a policy checkpoint");
    if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  PolicyHead head;
  if (!std::getline(in, line)) throw CheckpointError("missing head line");
  {
    std::istringstream ls(line);
    std::string name;
    ls >> word >> name;
    if (word != "head") throw CheckpointError("missing head line");
    if (name == "gaussian") {
      head = PolicyHead::kGaussian;
    } else if (name == "tanh-gaussian") {
      head = PolicyHead::kTanhGaussian;
    } else {
      throw CheckpointError("unknown policy head '" + name + "'");
    }
  }
  std::vector<int> sizes;
  if (!std::getline(in, line)) throw CheckpointError("missing layers line");
  {
    std::istringstream ls(line);
    ls >> word;
    if (word != "layers") throw CheckpointError("missing layers line");
    for (int s; ls >> s;) sizes.push_back(s);
  }
  if (sizes.size() < 3 || sizes.back() != 1 || sizes.front() != kObsDim) {
    throw CheckpointError("unsupported policy architecture");
  }
  for (int s : sizes) {
    if (s <= 0) throw CheckpointError("layer widths must be positive");
  }
  long count = 0;
  if (!std::getline(in, line)) throw CheckpointError("missing parameters line");
  {
    std::istringstream ls(line);
    if (!(ls >> word >> count) || word != "parameters") throw CheckpointError("missing parameters line");
  }
  PolicyNetwork policy(head, std::vector<int>(sizes.begin() + 1, sizes.end() - 1), sizes.front());
  if (count != policy.param_count()) {
    throw CheckpointError("parameter count " + std::to_string(count) + " does not match architecture");
  }
  Eigen::VectorXd flat(count);
  for (long i = 0; i < count; ++i) {
    std::string token;
    if (!(in >> token)) throw CheckpointError("truncated parameter list");
    flat(i) = parse_hex(token);
  }
  policy.set_flat(flat);
  return policy;
}

void save_policy(const std::string& path, const PolicyNetwork& policy) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  save_policy(out, policy);
  out.flush();
  if (!out) throw CheckpointError("failed writing checkpoint '" + path + "'");
}

PolicyNetwork load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read checkpoint '" + path + "'");
  try {
    return load_policy(in);
  } catch (const CheckpointError& e) {
    throw CheckpointError("checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace ebrake
