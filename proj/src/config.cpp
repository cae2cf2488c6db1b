#include "ebrake/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "ebrake/format.hpp"

namespace ebrake {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return v;
}

long to_long(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (value.empty() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || value[0] == '-' || *end != '\0' || errno == ERANGE) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<int> to_widths(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  for (std::string item; std::getline(ss, item, ',');) {
    const long w = to_long(key, trim(item));
    if (w <= 0 || w > 1 << 16) throw ConfigError(key + ": layer widths must be positive");
    out.push_back(static_cast<int>(w));
  }
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list of widths");
  return out;
}

std::string widths_string(const std::vector<int>& widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(widths[i]);
  }
  return out;
}

template <class T>
struct Field {
  std::string key;
  std::function<void(T&, const std::string&, const std::string&)> set;
  std::function<std::string(const T&)> get;
};

template <class T, class M>
Field<T> number(std::string key, M T::*member) {
  return {key,
          [member](T& t, const std::string& k, const std::string& v) { t.*member = to_double(k, v); },
          [member](const T& t) { return exact_number(t.*member); }};
}

template <class T, class Get>
Field<T> number_ref(std::string key, Get ref) {
  return {key, [ref](T& t, const std::string& k, const std::string& v) { ref(t) = to_double(k, v); },
          [ref](const T& t) { return exact_number(ref(const_cast<T&>(t))); }};
}

template <class T, class Get>
Field<T> integer_ref(std::string key, Get ref) {
  return {key,
          [ref](T& t, const std::string& k, const std::string& v) {
            ref(t) = static_cast<std::remove_reference_t<decltype(ref(t))>>(to_long(k, v));
          },
          [ref](const T& t) { return std::to_string(ref(const_cast<T&>(t))); }};
}

template <class T, class Get>
Field<T> boolean_ref(std::string key, Get ref) {
  return {key, [ref](T& t, const std::string& k, const std::string& v) { ref(t) = to_bool(k, v); },
          [ref](const T& t) { return std::string(ref(const_cast<T&>(t)) ? "true" : "false"); }};
}

template <class T, class Get>
Field<T> widths_ref(std::string key, Get ref) {
  return {key, [ref](T& t, const std::string& k, const std::string& v) { ref(t) = to_widths(k, v); },
          [ref](const T& t) { return widths_string(ref(const_cast<T&>(t))); }};
}

// Physical parameters shared by scenarios and families; `base` projects the
// owning record onto its ScenarioConfig.
template <class T, class Base>
void physical_fields(std::vector<Field<T>>& f, Base base) {
  static const char* names[3] = {"1", "2", "3"};
  for (int i = 0; i < 3; ++i) {
    f.push_back(number_ref<T>(std::string("mass") + names[i],
                              [base, i](T& t) -> double& { return base(t).vehicles[i].mass; }));
    f.push_back(number_ref<T>(std::string("decel_cap") + names[i],
                              [base, i](T& t) -> double& { return base(t).vehicles[i].decel_cap; }));
    f.push_back(number_ref<T>(std::string("accel_cap") + names[i],
                              [base, i](T& t) -> double& { return base(t).vehicles[i].accel_cap; }));
  }
  f.push_back(number_ref<T>("restitution", [base](T& t) -> double& { return base(t).restitution; }));
  f.push_back(number_ref<T>("v2_max", [base](T& t) -> double& { return base(t).v2_max; }));
  f.push_back(number_ref<T>("dt", [base](T& t) -> double& { return base(t).dt; }));
  f.push_back(integer_ref<T>("horizon", [base](T& t) -> int& { return base(t).horizon; }));
}

const std::vector<Field<ScenarioConfig>>& scenario_table() {
  static const auto table = [] {
    std::vector<Field<ScenarioConfig>> f;
    auto self = [](ScenarioConfig& s) -> ScenarioConfig& { return s; };
    physical_fields<ScenarioConfig>(f, self);
    for (int i = 0; i < 3; ++i) {
      f.push_back(number_ref<ScenarioConfig>("v" + std::to_string(i + 1) + "_0",
                                             [i](ScenarioConfig& s) -> double& { return s.v0[i]; }));
    }
    f.push_back(number("d1_0", &ScenarioConfig::d1_0));
    f.push_back(number("d2_0", &ScenarioConfig::d2_0));
    f.push_back(number("tau2", &ScenarioConfig::tau2));
    f.push_back(number("tau3", &ScenarioConfig::tau3));
    return f;
  }();
  return table;
}

const std::vector<Field<ScenarioFamily>>& family_table() {
  static const auto table = [] {
    std::vector<Field<ScenarioFamily>> f;
    physical_fields<ScenarioFamily>(f, [](ScenarioFamily& s) -> ScenarioConfig& { return s.base; });
    auto range = [&f](const std::string& name, Range ScenarioFamily::*member) {
      f.push_back(number_ref<ScenarioFamily>(name + "_min",
                                             [member](ScenarioFamily& s) -> double& { return (s.*member).lo; }));
      f.push_back(number_ref<ScenarioFamily>(name + "_max",
                                             [member](ScenarioFamily& s) -> double& { return (s.*member).hi; }));
    };
    range("d1_0", &ScenarioFamily::d1);
    range("d2_0", &ScenarioFamily::d2);
    range("v1_0", &ScenarioFamily::v1);
    range("v2_0", &ScenarioFamily::v2);
    range("v3_0", &ScenarioFamily::v3);
    range("tau2", &ScenarioFamily::tau2);
    range("tau3", &ScenarioFamily::tau3);
    f.push_back(integer_ref<ScenarioFamily>("count", [](ScenarioFamily& s) -> int& { return s.count; }));
    f.push_back({"seed",
                 [](ScenarioFamily& s, const std::string& k, const std::string& v) { s.seed = to_u64(k, v); },
                 [](const ScenarioFamily& s) { return std::to_string(s.seed); }});
    return f;
  }();
  return table;
}

const std::vector<Field<RewardWeights>>& weights_table() {
  static const auto table = [] {
    std::vector<Field<RewardWeights>> f;
    f.push_back(number("w_h", &RewardWeights::w_h));
    f.push_back(number("w_p", &RewardWeights::w_p));
    f.push_back(number("w_j", &RewardWeights::w_j));
    f.push_back(number_ref<RewardWeights>("k_energy_1", [](RewardWeights& w) -> double& { return w.k_energy[0]; }));
    f.push_back(number_ref<RewardWeights>("k_energy_2", [](RewardWeights& w) -> double& { return w.k_energy[1]; }));
    f.push_back(number("k_d", &RewardWeights::k_d));
    f.push_back(number("d_safe", &RewardWeights::d_safe));
    f.push_back(number("d_target", &RewardWeights::d_target));
    f.push_back(number("tau_scale", &RewardWeights::tau_scale));
    f.push_back(number("r_safe", &RewardWeights::r_safe));
    return f;
  }();
  return table;
}

const std::vector<Field<TrainerConfig>>& trainer_table() {
  using T = TrainerConfig;
  static const auto table = [] {
    std::vector<Field<T>> f;
    f.push_back(number("gamma", &T::gamma));
    f.push_back(number("learning_rate", &T::learning_rate));
    f.push_back({"lr_schedule",
                 [](T& t, const std::string& k, const std::string& v) {
                   if (v == "cosine") {
                     t.cosine_schedule = true;
                   } else if (v == "constant") {
                     t.cosine_schedule = false;
                   } else {
                     throw ConfigError(k + ": expected cosine or constant, got '" + v + "'");
                   }
                 },
                 [](const T& t) { return std::string(t.cosine_schedule ? "cosine" : "constant"); }});
    f.push_back(integer_ref<T>("total_steps", [](T& t) -> long& { return t.total_steps; }));
    f.push_back(integer_ref<T>("eval_interval", [](T& t) -> long& { return t.eval_interval; }));
    f.push_back(integer_ref<T>("eval_episodes", [](T& t) -> int& { return t.eval_episodes; }));
    f.push_back(widths_ref<T>("policy_hidden", [](T& t) -> std::vector<int>& { return t.policy_hidden; }));
    f.push_back(widths_ref<T>("value_hidden", [](T& t) -> std::vector<int>& { return t.value_hidden; }));
    f.push_back(widths_ref<T>("q_hidden", [](T& t) -> std::vector<int>& { return t.q_hidden; }));
    f.push_back(integer_ref<T>("ppo.n_steps", [](T& t) -> int& { return t.ppo.n_steps; }));
    f.push_back(integer_ref<T>("ppo.n_epochs", [](T& t) -> int& { return t.ppo.n_epochs; }));
    f.push_back(integer_ref<T>("ppo.batch_size", [](T& t) -> int& { return t.ppo.batch_size; }));
    f.push_back(number_ref<T>("ppo.clip_epsilon", [](T& t) -> double& { return t.ppo.clip_epsilon; }));
    f.push_back(number_ref<T>("ppo.gae_lambda", [](T& t) -> double& { return t.ppo.gae_lambda; }));
    f.push_back(number_ref<T>("ppo.c1", [](T& t) -> double& { return t.ppo.c1; }));
    f.push_back(number_ref<T>("ppo.c2", [](T& t) -> double& { return t.ppo.c2; }));
    f.push_back(number_ref<T>("ppo.target_kl", [](T& t) -> double& { return t.ppo.target_kl; }));
    f.push_back(number_ref<T>("ppo.max_grad_norm", [](T& t) -> double& { return t.ppo.max_grad_norm; }));
    f.push_back(boolean_ref<T>("ppo.normalize_advantage", [](T& t) -> bool& { return t.ppo.normalize_advantage; }));
    f.push_back(integer_ref<T>("sac.batch_size", [](T& t) -> int& { return t.sac.batch_size; }));
    f.push_back(integer_ref<T>("sac.buffer_size", [](T& t) -> long& { return t.sac.buffer_size; }));
    f.push_back(integer_ref<T>("sac.learning_starts", [](T& t) -> long& { return t.sac.learning_starts; }));
    f.push_back(number_ref<T>("sac.tau", [](T& t) -> double& { return t.sac.tau; }));
    f.push_back(integer_ref<T>("sac.train_freq", [](T& t) -> int& { return t.sac.train_freq; }));
    f.push_back(integer_ref<T>("sac.gradient_steps", [](T& t) -> int& { return t.sac.gradient_steps; }));
    f.push_back(integer_ref<T>("sac.target_update_interval",
                               [](T& t) -> int& { return t.sac.target_update_interval; }));
    f.push_back(boolean_ref<T>("sac.auto_alpha", [](T& t) -> bool& { return t.sac.auto_alpha; }));
    f.push_back(number_ref<T>("sac.initial_alpha", [](T& t) -> double& { return t.sac.initial_alpha; }));
    f.push_back(number_ref<T>("sac.target_entropy", [](T& t) -> double& { return t.sac.target_entropy; }));
    return f;
  }();
  return table;
}

template <class T>
const std::vector<Field<T>>& table_for();
template <>
const std::vector<Field<ScenarioConfig>>& table_for<ScenarioConfig>() { return scenario_table(); }
template <>
const std::vector<Field<ScenarioFamily>>& table_for<ScenarioFamily>() { return family_table(); }
template <>
const std::vector<Field<RewardWeights>>& table_for<RewardWeights>() { return weights_table(); }
template <>
const std::vector<Field<TrainerConfig>>& table_for<TrainerConfig>() { return trainer_table(); }

template <class T>
const Field<T>& find_field(const std::string& key) {
  for (const auto& f : table_for<T>()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
  std::vector<KeyValue> out;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), number};
    if (kv.key.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

template <class T>
void ConfigSchema<T>::set(T& target, const std::string& key, const std::string& value) {
  find_field<T>(key).set(target, key, value);
}

template <class T>
std::string ConfigSchema<T>::get(const T& target, const std::string& key) {
  return find_field<T>(key).get(target);
}

template <class T>
std::vector<std::string> ConfigSchema<T>::keys() {
  std::vector<std::string> out;
  for (const auto& f : table_for<T>()) out.push_back(f.key);
  return out;
}

template <class T>
void load_config(T& target, std::istream& in, const std::string& source) {
  for (const auto& kv : parse_key_values(in, source)) {
    try {
      ConfigSchema<T>::set(target, kv.key, kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
}

template <class T>
void load_config_file(T& target, const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config not found: " + path);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path);
  load_config(target, in, path);
}

template <class T>
std::string dump_config(const T& target) {
  std::string out;
  for (const auto& f : table_for<T>()) out += f.key + " = " + f.get(target) + "\n";
  return out;
}

#define EBRAKE_CONFIG_INSTANTIATE(T)                                  \
  template struct ConfigSchema<T>;                                    \
  template void load_config<T>(T&, std::istream&, const std::string&); \
  template void load_config_file<T>(T&, const std::string&);          \
  template std::string dump_config<T>(const T&);

EBRAKE_CONFIG_INSTANTIATE(ScenarioConfig)
EBRAKE_CONFIG_INSTANTIATE(ScenarioFamily)
EBRAKE_CONFIG_INSTANTIATE(RewardWeights)
EBRAKE_CONFIG_INSTANTIATE(TrainerConfig)

#undef EBRAKE_CONFIG_INSTANTIATE

}  // namespace ebrake
