#include "harbench/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include "harbench/rng.hpp"
#include "harbench/util.hpp"

namespace harbench {

std::string placement_name(Placement p) {
  switch (p) {
    case Placement::wrist: return "wrist";
    case Placement::waist: return "waist";
    default: return "other";
  }
}

int LabelSchema::index_of(const std::string& canonical) const {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == canonical) return static_cast<int>(i);
  }
  return -1;
}

LabelSchema capture24_schema() {
  return LabelSchema{"capture24", {"sleep", "walking", "bicycling", "sit-stand"}};
}

LabelSchema hhar_schema() { return LabelSchema{"hhar", {"upstairs", "downstairs"}}; }

std::string canonical_label(const std::string& raw) {
  std::string s = to_lower(trim(raw));
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"bicycle", "bicycling"}, {"cycling", "bicycling"}, {"biking", "bicycling"},
      {"sleeping", "sleep"},    {"walk", "walking"},
      {"sit_stand", "sit-stand"}, {"sit stand", "sit-stand"}, {"sitstand", "sit-stand"},
      {"stairsup", "upstairs"}, {"stairs_up", "upstairs"}, {"climbing upstairs", "upstairs"},
      {"stairsdown", "downstairs"}, {"stairs_down", "downstairs"},
      {"climbing downstairs", "downstairs"},
  };
  for (const auto& [from, to] : table) {
    if (s == from) return to;
  }
  return s;
}

const std::vector<std::pair<std::string, std::string>>& label_synonyms() {
  // surface form -> canonical; canonical names themselves are implied
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"sleep", "sleep"},       {"sleeping", "sleep"},      {"asleep", "sleep"},
      {"walking", "walking"},   {"walk", "walking"},        {"walks", "walking"},
      {"bicycling", "bicycling"}, {"bicycle", "bicycling"}, {"cycling", "bicycling"},
      {"biking", "bicycling"},  {"riding a bicycle", "bicycling"},
      {"sit-stand", "sit-stand"}, {"sit stand", "sit-stand"},
      {"sitting and standing", "sit-stand"}, {"sit/stand", "sit-stand"},
      {"upstairs", "upstairs"}, {"stairsup", "upstairs"},
      {"ascending stairs", "upstairs"}, {"climbing up stairs", "upstairs"},
      {"going up stairs", "upstairs"}, {"walking upstairs", "upstairs"},
      {"downstairs", "downstairs"}, {"stairsdown", "downstairs"},
      {"descending stairs", "downstairs"}, {"going down stairs", "downstairs"},
      {"walking downstairs", "downstairs"},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Validation and fingerprint

namespace {

double median_spacing(const std::vector<ImuSample>& samples) {
  if (samples.size() < 2) return 0.0;
  std::vector<double> dt;
  dt.reserve(samples.size() - 1);
  for (size_t i = 1; i < samples.size(); ++i) dt.push_back(samples[i].t - samples[i - 1].t);
  std::nth_element(dt.begin(), dt.begin() + dt.size() / 2, dt.end());
  return dt[dt.size() / 2];
}

}  // namespace

void Dataset::validate() const {
  if (recordings.empty()) fail("dataset: no recordings");
  std::vector<bool> seen(schema.size(), false);
  bool gyro = recordings.front().has_gyro;
  for (const auto& rec : recordings) {
    if (rec.samples.size() != rec.labels.size()) {
      fail("dataset: samples/labels size mismatch for user " + rec.user_id);
    }
    if (rec.samples.empty()) fail("dataset: empty recording for user " + rec.user_id);
    if (rec.has_gyro != gyro) fail("dataset: mixed gyro schemas across recordings");
    for (size_t i = 0; i < rec.samples.size(); ++i) {
      if (i > 0 && !(rec.samples[i].t > rec.samples[i - 1].t)) {
        fail("dataset: non-increasing timestamps for user " + rec.user_id);
      }
      int16_t id = rec.labels[i];
      if (id < 0 || static_cast<size_t>(id) >= schema.size()) {
        fail("dataset: label id out of schema for user " + rec.user_id);
      }
      seen[static_cast<size_t>(id)] = true;
    }
    if (rec.samples.size() >= 2) {
      double med = median_spacing(rec.samples);
      if (med <= 0.0) fail("dataset: degenerate timestamps for user " + rec.user_id);
      double est = 1.0 / med;
      if (std::fabs(est - rec.sample_rate_hz) > 0.05 * rec.sample_rate_hz) {
        fail("dataset: declared rate " + format_fixed(rec.sample_rate_hz, 3) +
             "Hz does not match median spacing for user " + rec.user_id);
      }
    }
  }
  for (size_t k = 0; k < schema.size(); ++k) {
    if (!seen[k]) fail("dataset: no recording carries label '" + schema.labels[k] + "'");
  }
}

std::string Dataset::fingerprint() const {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  auto put = [&](const void* p, size_t n) { EVP_DigestUpdate(ctx, p, n); };
  auto put_str = [&](const std::string& s) {
    uint64_t n = s.size();
    put(&n, sizeof(n));
    put(s.data(), s.size());
  };
  auto put_f64 = [&](double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    unsigned char le[8];
    for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(bits >> (8 * i));
    put(le, 8);
  };
  put_str(schema.dataset_name);
  for (const auto& l : schema.labels) put_str(l);
  for (const auto& rec : recordings) {
    put_str(rec.user_id);
    put_str(placement_name(rec.placement));
    put_f64(rec.sample_rate_hz);
    uint8_t g = rec.has_gyro ? 1 : 0;
    put(&g, 1);
    for (size_t i = 0; i < rec.samples.size(); ++i) {
      const auto& s = rec.samples[i];
      put_f64(s.t);
      for (double v : s.accel) put_f64(v);
      if (rec.has_gyro) {
        for (double v : s.gyro) put_f64(v);
      }
      int16_t id = rec.labels[i];
      put(&id, sizeof(id));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV loading

namespace {

struct CsvCursor {
  std::string_view line;
  size_t pos = 0;
  const std::string* file;
  size_t line_no;

  std::string_view next_field() {
    if (pos > line.size()) {
      fail("malformed row (missing field) at " + *file + ":" + std::to_string(line_no));
    }
    size_t comma = line.find(',', pos);
    size_t end = (comma == std::string_view::npos) ? line.size() : comma;
    std::string_view f = line.substr(pos, end - pos);
    pos = (comma == std::string_view::npos) ? line.size() + 1 : comma + 1;
    return f;
  }

  double next_double() {
    std::string_view f = next_field();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      fail("malformed numeric field '" + std::string(f) + "' at " + *file + ":" +
           std::to_string(line_no));
    }
    return v;
  }
};

std::vector<std::filesystem::path> csv_files_sorted(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    fail("dataset directory not found: " + root.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

double estimate_rate(const std::vector<ImuSample>& samples) {
  double med = median_spacing(samples);
  return med > 0.0 ? 1.0 / med : 0.0;
}

void for_each_line(const std::string& content, const std::string& file,
                   const std::function<void(std::string_view, size_t)>& fn) {
  size_t start = 0, line_no = 1;
  while (start <= content.size()) {
    size_t nl = content.find('\n', start);
    size_t end = (nl == std::string::npos) ? content.size() : nl;
    std::string_view line(content.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) fn(line, line_no);
    if (nl == std::string::npos) break;
    start = nl + 1;
    ++line_no;
  }
  (void)file;
}

}  // namespace

Dataset load_capture24(const std::filesystem::path& root, const LabelSchema& schema) {
  auto files = csv_files_sorted(root);
  if (files.empty()) fail("no recordings in " + root.string());

  Dataset ds;
  ds.schema = schema;
  for (const auto& path : files) {
    std::string content = read_file(path);
    std::string fname = path.string();
    Recording rec;
    rec.user_id = path.stem().string();
    rec.placement = Placement::wrist;
    rec.has_gyro = false;
    bool header_seen = false;
    for_each_line(content, fname, [&](std::string_view line, size_t line_no) {
      if (!header_seen) {
        if (trim(line) != "t,ax,ay,az,label") {
          fail("unexpected header '" + std::string(line) + "' in " + fname +
               " (want t,ax,ay,az,label)");
        }
        header_seen = true;
        return;
      }
      CsvCursor cur{line, 0, &fname, line_no};
      ImuSample s;
      s.t = cur.next_double();
      s.accel = {cur.next_double(), cur.next_double(), cur.next_double()};
      std::string canon = canonical_label(std::string(cur.next_field()));
      int id = schema.index_of(canon);
      if (id < 0) {
        ds.dropped_rows[canon] += 1;
        return;
      }
      rec.samples.push_back(s);
      rec.labels.push_back(static_cast<int16_t>(id));
    });
    if (rec.samples.empty()) fail("recording has zero retained rows: " + fname);
    rec.sample_rate_hz = estimate_rate(rec.samples);
    ds.recordings.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

Dataset load_hhar(const std::filesystem::path& root, const LabelSchema& schema) {
  auto files = csv_files_sorted(root);
  if (files.empty()) fail("no recordings in " + root.string());

  Dataset ds;
  ds.schema = schema;
  // rows grouped by the user column, first-seen order
  std::vector<std::string> user_order;
  std::map<std::string, Recording> by_user;

  for (const auto& path : files) {
    std::string content = read_file(path);
    std::string fname = path.string();
    bool header_seen = false;
    for_each_line(content, fname, [&](std::string_view line, size_t line_no) {
      if (!header_seen) {
        std::string h = trim(line);
        if (h == "t,ax,ay,az,label") {
          fail("gyro columns missing in " + fname + " (want t,ax,ay,az,gx,gy,gz,user,label)");
        }
        if (h != "t,ax,ay,az,gx,gy,gz,user,label") {
          fail("unexpected header '" + h + "' in " + fname);
        }
        header_seen = true;
        return;
      }
      CsvCursor cur{line, 0, &fname, line_no};
      ImuSample s;
      s.t = cur.next_double();
      s.accel = {cur.next_double(), cur.next_double(), cur.next_double()};
      s.gyro = {cur.next_double(), cur.next_double(), cur.next_double()};
      std::string user(trim(cur.next_field()));
      std::string canon = canonical_label(std::string(cur.next_field()));
      int id = schema.index_of(canon);
      if (id < 0) {
        ds.dropped_rows[canon] += 1;
        return;
      }
      auto it = by_user.find(user);
      if (it == by_user.end()) {
        Recording rec;
        rec.user_id = user;
        rec.placement = Placement::waist;
        rec.has_gyro = true;
        it = by_user.emplace(user, std::move(rec)).first;
        user_order.push_back(user);
      }
      it->second.samples.push_back(s);
      it->second.labels.push_back(static_cast<int16_t>(id));
    });
  }
  if (user_order.empty()) fail("no rows with schema labels under " + root.string());
  for (const auto& user : user_order) {
    Recording& rec = by_user[user];
    if (rec.samples.empty()) fail("recording has zero retained rows for user " + user);
    rec.sample_rate_hz = estimate_rate(rec.samples);
    ds.recordings.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  bool gyro = !dataset.recordings.empty() && dataset.recordings.front().has_gyro;
  for (const auto& rec : dataset.recordings) {
    std::string out;
    out.reserve(rec.samples.size() * 64);
    out += gyro ? "t,ax,ay,az,gx,gy,gz,user,label\n" : "t,ax,ay,az,label\n";
    for (size_t i = 0; i < rec.samples.size(); ++i) {
      const auto& s = rec.samples[i];
      out += format_fixed(s.t, 6);
      for (double v : s.accel) {
        out += ',';
        out += format_fixed(v, 6);
      }
      if (gyro) {
        for (double v : s.gyro) {
          out += ',';
          out += format_fixed(v, 6);
        }
        out += ',';
        out += rec.user_id;
      }
      out += ',';
      out += dataset.schema.labels[static_cast<size_t>(rec.labels[i])];
      out += '\n';
    }
    write_file(root / (rec.user_id + ".csv"), out);
  }
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

enum class GenKind { near_zero_noise, gait_sine, smooth_fast_periodic, level_steps,
                     stair_up, stair_down };

GenKind gen_kind(const std::string& name) {
  if (name == "near-zero-noise") return GenKind::near_zero_noise;
  if (name == "gait-sine") return GenKind::gait_sine;
  if (name == "smooth-fast-periodic") return GenKind::smooth_fast_periodic;
  if (name == "level-steps") return GenKind::level_steps;
  if (name == "stair-up") return GenKind::stair_up;
  if (name == "stair-down") return GenKind::stair_down;
  fail("unknown generator name: " + name);
}

// phase in [0,1) -> [-1,1], rising over `rise` of the period then falling
double asymmetric_sawtooth(double phase, double rise) {
  double p = phase - std::floor(phase);
  if (p < rise) return 2.0 * (p / rise) - 1.0;
  return 1.0 - 2.0 * ((p - rise) / (1.0 - rise));
}

void generate_segment(GenKind kind, std::mt19937_64& gen, double rate_hz, size_t n,
                      bool with_gyro, std::vector<ImuSample>& out) {
  NormalSampler normal;
  auto t0 = out.size();
  out.resize(t0 + n);

  switch (kind) {
    case GenKind::near_zero_noise: {
      std::array<double, 3> base = {uniform(gen, -0.05, 0.05), uniform(gen, -0.05, 0.05),
                                    uniform(gen, 0.95, 1.05)};
      for (size_t i = 0; i < n; ++i) {
        auto& s = out[t0 + i];
        for (int a = 0; a < 3; ++a) s.accel[a] = base[a] + normal(gen, 0.0, 0.01);
        if (with_gyro) {
          for (int a = 0; a < 3; ++a) s.gyro[a] = normal(gen, 0.0, 0.01);
        }
      }
      break;
    }
    case GenKind::gait_sine:
    case GenKind::smooth_fast_periodic: {
      bool gait = (kind == GenKind::gait_sine);
      double f = gait ? uniform(gen, 1.2, 1.8) : uniform(gen, 2.6, 3.4);
      double amp = gait ? uniform(gen, 0.9, 1.2) : uniform(gen, 0.7, 0.9);
      double noise = gait ? 0.10 : 0.04;
      std::array<double, 3> phase = {uniform(gen, 0.0, 2 * M_PI), uniform(gen, 0.0, 2 * M_PI),
                                     uniform(gen, 0.0, 2 * M_PI)};
      std::array<double, 3> scale = {1.0, 0.7, 0.8};
      for (size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / rate_hz;
        auto& s = out[t0 + i];
        for (int a = 0; a < 3; ++a) {
          double base = (a == 2) ? 1.0 : 0.0;
          s.accel[a] = base + scale[a] * amp * std::sin(2 * M_PI * f * t + phase[a]) +
                       normal(gen, 0.0, noise);
        }
        if (with_gyro) {
          for (int a = 0; a < 3; ++a) {
            s.gyro[a] = 0.5 * amp * std::cos(2 * M_PI * f * t + phase[a]) +
                        normal(gen, 0.0, noise);
          }
        }
      }
      break;
    }
    case GenKind::level_steps: {
      // plateaus alternating between two postures, switch every 2-5 s
      std::array<double, 3> lo = {-0.5, -0.3, 0.8};
      std::array<double, 3> hi = {0.5, 0.3, 1.2};
      bool state = uniform01(gen) < 0.5;
      size_t next_switch = static_cast<size_t>(uniform(gen, 2.0, 5.0) * rate_hz);
      for (size_t i = 0; i < n; ++i) {
        if (i >= next_switch) {
          state = !state;
          next_switch = i + static_cast<size_t>(uniform(gen, 2.0, 5.0) * rate_hz);
        }
        auto& s = out[t0 + i];
        const auto& level = state ? hi : lo;
        for (int a = 0; a < 3; ++a) s.accel[a] = level[a] + normal(gen, 0.0, 0.03);
        if (with_gyro) {
          for (int a = 0; a < 3; ++a) s.gyro[a] = normal(gen, 0.0, 0.03);
        }
      }
      break;
    }
    case GenKind::stair_up:
    case GenKind::stair_down: {
      bool up = (kind == GenKind::stair_up);
      double f = uniform(gen, 0.7, 1.1);            // step cadence
      double rise = up ? 0.75 : 0.25;               // asymmetric tooth shape
      double vertical_bias = up ? 0.35 : -0.35;     // drift of the vertical axis
      double amp = uniform(gen, 0.6, 0.9);
      double phase = uniform(gen, 0.0, 1.0);
      for (size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / rate_hz;
        auto& s = out[t0 + i];
        double tooth = asymmetric_sawtooth(f * t + phase, rise);
        s.accel[0] = 0.6 * amp * tooth + normal(gen, 0.0, 0.08);
        s.accel[1] = 0.4 * amp * asymmetric_sawtooth(f * t + phase + 0.33, rise) +
                     normal(gen, 0.0, 0.08);
        s.accel[2] = 1.0 + vertical_bias + amp * tooth + normal(gen, 0.0, 0.08);
        if (with_gyro) {
          s.gyro[0] = 0.4 * amp * asymmetric_sawtooth(f * t + phase + 0.5, rise) +
                      normal(gen, 0.0, 0.05);
          s.gyro[1] = normal(gen, 0.0, 0.05);
          s.gyro[2] = 0.2 * amp * tooth + normal(gen, 0.0, 0.05);
        }
      }
      break;
    }
  }
}

}  // namespace

SynthSpec synth_spec_capture24_like(size_t n_users, double seconds_per_label,
                                    double sample_rate_hz) {
  SynthSpec spec;
  spec.schema = capture24_schema();
  spec.generators = {{"sleep", "near-zero-noise"},
                     {"walking", "gait-sine"},
                     {"bicycling", "smooth-fast-periodic"},
                     {"sit-stand", "level-steps"}};
  spec.n_users = n_users;
  spec.seconds_per_label = seconds_per_label;
  spec.sample_rate_hz = sample_rate_hz;
  spec.with_gyro = false;
  return spec;
}

SynthSpec synth_spec_hhar_like(size_t n_users, double seconds_per_label,
                               double sample_rate_hz) {
  SynthSpec spec;
  spec.schema = hhar_schema();
  spec.generators = {{"upstairs", "stair-up"}, {"downstairs", "stair-down"}};
  spec.n_users = n_users;
  spec.seconds_per_label = seconds_per_label;
  spec.sample_rate_hz = sample_rate_hz;
  spec.with_gyro = true;
  return spec;
}

Dataset synth_corpus(const SynthSpec& spec, uint64_t seed) {
  if (spec.schema.labels.empty()) fail("synth: empty schema");
  for (const auto& label : spec.schema.labels) {
    auto it = spec.generators.find(label);
    if (it == spec.generators.end()) fail("synth: no generator for label " + label);
    gen_kind(it->second);  // validates the name
  }

  Dataset ds;
  ds.schema = spec.schema;
  ds.accel_unit = "g";
  size_t n_per_segment = static_cast<size_t>(std::llround(spec.seconds_per_label *
                                                          spec.sample_rate_hz));
  for (size_t u = 0; u < spec.n_users; ++u) {
    std::string user = "user" + std::string(u < 9 ? "0" : "") + std::to_string(u + 1);
    Recording rec;
    rec.user_id = user;
    rec.placement = spec.with_gyro ? Placement::waist : Placement::wrist;
    rec.sample_rate_hz = spec.sample_rate_hz;
    rec.has_gyro = spec.with_gyro;

    std::vector<size_t> order(spec.schema.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::mt19937_64 order_gen(seed_for(seed, user + "/order"));
    shuffle_deterministic(order, order_gen);

    for (size_t k : order) {
      const std::string& label = spec.schema.labels[k];
      std::mt19937_64 gen(seed_for(seed, user + "/" + label));
      generate_segment(gen_kind(spec.generators.at(label)), gen, spec.sample_rate_hz,
                       n_per_segment, spec.with_gyro, rec.samples);
      rec.labels.insert(rec.labels.end(), n_per_segment, static_cast<int16_t>(k));
    }
    for (size_t i = 0; i < rec.samples.size(); ++i) {
      rec.samples[i].t = static_cast<double>(i) / spec.sample_rate_hz;
    }
    ds.recordings.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

}  // namespace harbench
