#include "samaqm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>

#include "samaqm/io.hpp"

namespace samaqm::config {

MissingKeyError::MissingKeyError(const std::string& key)
    : ConfigError(key, "missing required key '" + key + "'") {}

BadValueError::BadValueError(const std::string& key, std::string_view value, const std::string& why)
    : ConfigError(key, "bad value '" + std::string(value) + "' for key '" + key + "': " + why) {}

UnknownKeyError::UnknownKeyError(const std::string& key)
    : ConfigError(key, "unknown key '" + key + "'") {}

SyntaxError::SyntaxError(std::size_t line, const std::string& what)
    : ConfigError("", "config line " + std::to_string(line) + ": " + what) {}

transport::TrafficMix ScenarioConfig::traffic_mix() const {
  transport::TrafficMix m;
  m.n_http = n_http;
  m.n_ftp = n_ftp;
  m.http_size_mean = http_size_mean;
  m.http_idle_mean = http_idle_mean;
  m.start_jitter_s = start_jitter_s;
  m.initial_ssthresh = initial_ssthresh;
  m.packet_bytes = packet_bytes;
  m.link_delay_s = link_delay_s;
  return m;
}

aqm::RedParams ScenarioConfig::red_params() const {
  aqm::RedParams r = red;
  r.typical_service_s = static_cast<double>(packet_bytes) * 8.0 / bandwidth_bps;
  return r;
}

aqm::PiParams ScenarioConfig::pi_params() const {
  aqm::PiParams p = pi;
  p.a *= pi_gain_scale;
  p.b *= pi_gain_scale;
  return p;
}

Preset parse_preset(std::string_view name) {
  if (name == "desk") return Preset::Desk;
  if (name == "paper") return Preset::Paper;
  throw BadValueError("preset", name, "expected 'desk' or 'paper'");
}

void apply_preset(ScenarioConfig& cfg, Preset preset) {
  switch (preset) {
    case Preset::None:
      return;
    case Preset::Desk:
      cfg.n_http = 20;
      cfg.n_ftp = 10;
      cfg.duration_s = 60.0;
      cfg.buffer_packets = 200;
      // Thresholds keep their proportion of the 800-packet buffer.
      cfg.red.min_th = 25.0;
      cfg.red.max_th = 75.0;
      cfg.pi.q_ref = 50.0;
      cfg.pi_gain_scale = 100.0;
      cfg.blue.d1 = 0.0025;
      cfg.blue.d2 = 0.00025;
      return;
    case Preset::Paper:
      cfg.n_http = 200;
      cfg.n_ftp = 100;
      cfg.duration_s = 180.0;
      cfg.buffer_packets = 800;
      cfg.red.min_th = 100.0;
      cfg.red.max_th = 300.0;
      cfg.pi.q_ref = 200.0;
      cfg.pi_gain_scale = 100.0;
      cfg.blue.d1 = 0.0025;
      cfg.blue.d2 = 0.00025;
      return;
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty())
    throw BadValueError(key, value, "not a valid number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw BadValueError(key, value, "must be finite");
  }
  return out;
}

double positive(const std::string& key, std::string_view v) {
  const double x = parse_number<double>(key, v);
  if (!(x > 0.0)) throw BadValueError(key, v, "must be positive");
  return x;
}

double non_negative(const std::string& key, std::string_view v) {
  const double x = parse_number<double>(key, v);
  if (!(x >= 0.0)) throw BadValueError(key, v, "must be non-negative");
  return x;
}

double unit_interval(const std::string& key, std::string_view v) {
  const double x = parse_number<double>(key, v);
  if (!(x > 0.0 && x <= 1.0)) throw BadValueError(key, v, "must lie in (0,1]");
  return x;
}

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadValueError(key, v, "expected true or false");
}

struct KeySpec {
  std::string_view name;
  std::function<void(ScenarioConfig&, const std::string&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <class T>
std::string num(T v) {
  if constexpr (std::is_floating_point_v<T>)
    return fmt_real(v);
  else
    return std::to_string(v);
}

const std::vector<KeySpec>& key_table() {
  using C = ScenarioConfig;
  using K = const std::string&;
  using V = std::string_view;
  static const std::vector<KeySpec> table{
      {"bandwidth_bps", [](C& c, K k, V v) { c.bandwidth_bps = positive(k, v); },
       [](const C& c) { return num(c.bandwidth_bps); }},
      {"link_delay_s", [](C& c, K k, V v) { c.link_delay_s = non_negative(k, v); },
       [](const C& c) { return num(c.link_delay_s); }},
      {"buffer_packets",
       [](C& c, K k, V v) {
         c.buffer_packets = parse_number<std::size_t>(k, v);
         if (c.buffer_packets == 0) throw BadValueError(k, v, "must be positive");
       },
       [](const C& c) { return num(c.buffer_packets); }},
      {"packet_bytes",
       [](C& c, K k, V v) {
         c.packet_bytes = parse_number<std::uint32_t>(k, v);
         if (c.packet_bytes == 0) throw BadValueError(k, v, "must be positive");
       },
       [](const C& c) { return num(c.packet_bytes); }},
      {"n_http", [](C& c, K k, V v) { c.n_http = parse_number<std::size_t>(k, v); },
       [](const C& c) { return num(c.n_http); }},
      {"n_ftp", [](C& c, K k, V v) { c.n_ftp = parse_number<std::size_t>(k, v); },
       [](const C& c) { return num(c.n_ftp); }},
      {"duration_s", [](C& c, K k, V v) { c.duration_s = positive(k, v); },
       [](const C& c) { return num(c.duration_s); }},
      {"seed", [](C& c, K k, V v) { c.seed = parse_number<std::uint64_t>(k, v); },
       [](const C& c) { return num(c.seed); }},
      {"controller",
       [](C& c, K k, V v) {
         if (std::find(kControllers.begin(), kControllers.end(), v) == kControllers.end())
           throw BadValueError(k, v, "expected droptail, red, blue, pi or sam");
         c.controller = std::string(v);
       },
       [](const C& c) { return c.controller; }},
      {"sample_interval_s", [](C& c, K k, V v) { c.sample_interval_s = positive(k, v); },
       [](const C& c) { return num(c.sample_interval_s); }},
      {"http.size_mean",
       [](C& c, K k, V v) {
         c.http_size_mean = positive(k, v);
         if (c.http_size_mean < 1.0) throw BadValueError(k, v, "must be at least 1 packet");
       },
       [](const C& c) { return num(c.http_size_mean); }},
      {"http.idle_mean", [](C& c, K k, V v) { c.http_idle_mean = positive(k, v); },
       [](const C& c) { return num(c.http_idle_mean); }},
      {"flow.start_jitter_s", [](C& c, K k, V v) { c.start_jitter_s = non_negative(k, v); },
       [](const C& c) { return num(c.start_jitter_s); }},
      {"tcp.initial_ssthresh",
       [](C& c, K k, V v) {
         c.initial_ssthresh = positive(k, v);
         if (c.initial_ssthresh < 2.0) throw BadValueError(k, v, "must be at least 2");
       },
       [](const C& c) { return num(c.initial_ssthresh); }},
      {"red.w_q", [](C& c, K k, V v) { c.red.w_q = unit_interval(k, v); },
       [](const C& c) { return num(c.red.w_q); }},
      {"red.min_th", [](C& c, K k, V v) { c.red.min_th = non_negative(k, v); },
       [](const C& c) { return num(c.red.min_th); }},
      {"red.max_th", [](C& c, K k, V v) { c.red.max_th = positive(k, v); },
       [](const C& c) { return num(c.red.max_th); }},
      {"red.max_p", [](C& c, K k, V v) { c.red.max_p = unit_interval(k, v); },
       [](const C& c) { return num(c.red.max_p); }},
      {"red.count_correction", [](C& c, K k, V v) { c.red.count_correction = parse_bool(k, v); },
       [](const C& c) { return std::string(c.red.count_correction ? "true" : "false"); }},
      {"blue.d1", [](C& c, K k, V v) { c.blue.d1 = unit_interval(k, v); },
       [](const C& c) { return num(c.blue.d1); }},
      {"blue.d2", [](C& c, K k, V v) { c.blue.d2 = unit_interval(k, v); },
       [](const C& c) { return num(c.blue.d2); }},
      {"blue.freeze_time_s", [](C& c, K k, V v) { c.blue.freeze_time = non_negative(k, v); },
       [](const C& c) { return num(c.blue.freeze_time); }},
      {"pi.a", [](C& c, K k, V v) { c.pi.a = positive(k, v); },
       [](const C& c) { return num(c.pi.a); }},
      {"pi.b", [](C& c, K k, V v) { c.pi.b = positive(k, v); },
       [](const C& c) { return num(c.pi.b); }},
      {"pi.q_ref", [](C& c, K k, V v) { c.pi.q_ref = non_negative(k, v); },
       [](const C& c) { return num(c.pi.q_ref); }},
      {"pi.gain_scale", [](C& c, K k, V v) { c.pi_gain_scale = positive(k, v); },
       [](const C& c) { return num(c.pi_gain_scale); }},
      {"pi.sample_interval_s", [](C& c, K k, V v) { c.pi.sample_interval = positive(k, v); },
       [](const C& c) { return num(c.pi.sample_interval); }},
      {"sam.model_path", [](C& c, K, V v) { c.sam_model_path = std::string(v); },
       [](const C& c) { return c.sam_model_path; }},
      {"sam.label_mode",
       [](C& c, K k, V v) {
         if (v != "policy") throw BadValueError(k, v, "only 'policy' labeling is implemented");
         c.sam_label_mode = std::string(v);
       },
       [](const C& c) { return c.sam_label_mode; }},
      {"sam.theta", [](C& c, K k, V v) { c.policy.theta = unit_interval(k, v); },
       [](const C& c) { return num(c.policy.theta); }},
      {"sam.trend_gain", [](C& c, K k, V v) { c.policy.trend_gain = non_negative(k, v); },
       [](const C& c) { return num(c.policy.trend_gain); }},
      {"sam.weights",
       [](C& c, K k, V v) {
         // Five comma-separated non-negative reals, normalized to sum 1.
         std::array<double, sam::kWindow> w{};
         std::size_t i = 0;
         std::string_view rest = v;
         while (true) {
           const auto comma = rest.find(',');
           if (i >= w.size()) throw BadValueError(k, v, "expected 5 weights");
           w[i++] = non_negative(k, trim(rest.substr(0, comma)));
           if (comma == std::string_view::npos) break;
           rest = rest.substr(comma + 1);
         }
         if (i != w.size()) throw BadValueError(k, v, "expected 5 weights");
         double sum = 0.0;
         for (double x : w) sum += x;
         if (!(sum > 0.0)) throw BadValueError(k, v, "weights must not all be zero");
         for (double& x : w) x /= sum;
         c.policy.weights = w;
       },
       [](const C& c) {
         std::string s;
         for (std::size_t i = 0; i < c.policy.weights.size(); ++i)
           s += (i ? "," : "") + fmt_real(c.policy.weights[i]);
         return s;
       }},
      {"svm.C", [](C& c, K k, V v) { c.svm.C = positive(k, v); },
       [](const C& c) { return num(c.svm.C); }},
      {"svm.gamma", [](C& c, K k, V v) { c.svm.gamma = positive(k, v); },
       [](const C& c) { return num(c.svm.gamma); }},
      {"svm.tol", [](C& c, K k, V v) { c.svm.tol = positive(k, v); },
       [](const C& c) { return num(c.svm.tol); }},
      {"svm.max_passes",
       [](C& c, K k, V v) {
         c.svm.max_passes = parse_number<int>(k, v);
         if (c.svm.max_passes <= 0) throw BadValueError(k, v, "must be positive");
       },
       [](const C& c) { return num(c.svm.max_passes); }},
      {"train.n",
       [](C& c, K k, V v) {
         c.train_n = parse_number<std::size_t>(k, v);
         if (c.train_n < 2) throw BadValueError(k, v, "need at least 2 samples");
       },
       [](const C& c) { return num(c.train_n); }},
  };
  return table;
}

}  // namespace

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = key_table();
  const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& s) { return s.name == key; });
  if (it == table.end()) throw UnknownKeyError(std::string(key));
  it->set(cfg, std::string(key), trim(value));
}

void apply_override(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw BadValueError(std::string(trim(assignment)), assignment, "expected key=value");
  apply_setting(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void apply_text(ScenarioConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw SyntaxError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw SyntaxError(line_no, "empty key");
    apply_setting(cfg, key, trim(line.substr(eq + 1)));
  }
}

ScenarioConfig parse_config(const std::optional<std::filesystem::path>& path,
                            std::span<const std::string> overrides, Preset preset) {
  ScenarioConfig cfg;
  apply_preset(cfg, preset);
  if (path) apply_text(cfg, read_file(*path));
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

void require_runnable(const ScenarioConfig& cfg) {
  if (cfg.controller.empty()) throw MissingKeyError("controller");
  if (cfg.controller == "sam" && cfg.sam_model_path.empty()) throw MissingKeyError("sam.model_path");
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& s : key_table()) keys.emplace_back(s.name);
  return keys;
}

std::string format_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& s : key_table()) {
    const std::string value = s.get(cfg);
    if (!value.empty()) out += std::string(s.name) + " = " + value + '\n';
  }
  return out;
}

}  // namespace samaqm::config
