#include "iosim/channel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "iosim/rng.hpp"

namespace iosim {

double path_loss(double d, double alpha, double ref_gain) {
  if (d <= 0) throw std::invalid_argument("path_loss: distance must be > 0");
  return ref_gain * std::pow(d, -alpha);
}

double user_distance(double d_bi, double d_iu, double delta) {
  const double r =
      d_bi * d_bi + d_iu * d_iu - 2.0 * d_bi * d_iu * std::sin(delta);
  if (r < 0)
    throw std::invalid_argument("user_distance: negative radicand");
  return std::sqrt(r);
}

namespace {

void fill_cn(Philox& rng, CMat& a, double variance) {
  // Row-major fill so the draw order is layout-independent.
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) = rng.next_cgaussian(variance);
}

}  // namespace

ChannelSet sample_channels(const SystemConfig& cfg) {
  cfg.validate();
  Philox rng(cfg.seed);

  auto angle = [&](const std::vector<double>& fixed, int k) {
    if (static_cast<int>(fixed.size()) > k) return fixed[k];
    return rng.next_double() * (M_PI / 2.0);
  };
  std::vector<double> delta_r(cfg.k_r), delta_t(cfg.k_t);
  for (int k = 0; k < cfg.k_r; ++k) delta_r[k] = angle(cfg.geometry.delta_r, k);
  for (int k = 0; k < cfg.k_t; ++k) delta_t[k] = angle(cfg.geometry.delta_t, k);

  ChannelSet ch;
  ch.g.resize(cfg.n_elements, cfg.n_tx);
  ch.h_d.resize(cfg.n_tx, cfg.k_r);
  ch.h_r.resize(cfg.n_elements, cfg.k_r);
  ch.h_t.resize(cfg.n_elements, cfg.k_t);

  fill_cn(rng, ch.g, path_loss(cfg.geometry.d_bi, cfg.pathloss.bs_ios,
                               cfg.ref_gain));
  for (int k = 0; k < cfg.k_r; ++k) {
    const double d_bu =
        user_distance(cfg.geometry.d_bi, cfg.geometry.d_iu, delta_r[k]);
    const double v = path_loss(d_bu, cfg.pathloss.bs_user, cfg.ref_gain);
    for (int i = 0; i < cfg.n_tx; ++i) ch.h_d(i, k) = rng.next_cgaussian(v);
  }
  const double v_iu =
      path_loss(cfg.geometry.d_iu, cfg.pathloss.ios_user, cfg.ref_gain);
  for (int k = 0; k < cfg.k_r; ++k)
    for (int m = 0; m < cfg.n_elements; ++m)
      ch.h_r(m, k) = rng.next_cgaussian(v_iu);
  for (int k = 0; k < cfg.k_t; ++k)
    for (int m = 0; m < cfg.n_elements; ++m)
      ch.h_t(m, k) = rng.next_cgaussian(v_iu);
  return ch;
}

namespace {

nlohmann::json mat_to_json(const CMat& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < a.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < a.cols(); ++j)
      row.push_back({a(i, j).real(), a(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat mat_from_json(const nlohmann::json& rows, int expect_cols = -1) {
  const int r = static_cast<int>(rows.size());
  int c = r > 0 ? static_cast<int>(rows[0].size()) : std::max(expect_cols, 0);
  CMat a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      a(i, j) = cplx(rows[i][j][0].get<double>(), rows[i][j][1].get<double>());
  return a;
}

}  // namespace

std::string channels_to_json(const ChannelSet& ch, std::uint64_t seed) {
  nlohmann::json j;
  j["format"] = "iosim-channels";
  j["version"] = 1;
  j["generator"] = Philox::kName;
  j["seed"] = seed;
  j["n_tx"] = ch.n_tx();
  j["n_elements"] = ch.n_elements();
  j["k_r"] = ch.k_r();
  j["k_t"] = ch.k_t();
  j["g"] = mat_to_json(ch.g);
  j["h_d"] = mat_to_json(ch.h_d);
  j["h_r"] = mat_to_json(ch.h_r);
  j["h_t"] = mat_to_json(ch.h_t);
  return j.dump();
}

ChannelSet channels_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "iosim-channels")
    throw std::invalid_argument("not an iosim channel file");
  ChannelSet ch;
  const int nt = j["n_tx"].get<int>();
  ch.g = mat_from_json(j["g"], nt);
  ch.h_d = mat_from_json(j["h_d"], j["k_r"].get<int>());
  ch.h_r = mat_from_json(j["h_r"], j["k_r"].get<int>());
  ch.h_t = mat_from_json(j["h_t"], j["k_t"].get<int>());
  if (ch.h_d.rows() == 0) ch.h_d.resize(nt, 0);
  ch.validate();
  return ch;
}

namespace {

constexpr char kMagic[8] = {'I', 'O', 'S', 'C', 'H', '0', '0', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xFF;
  os.write(reinterpret_cast<char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xFF;
  os.write(reinterpret_cast<char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

double get_f64(std::istream& is) {
  const std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

void put_mat(std::ostream& os, const CMat& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      put_f64(os, a(i, j).real());
      put_f64(os, a(i, j).imag());
    }
}

void get_mat(std::istream& is, CMat& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double re = get_f64(is);
      const double im = get_f64(is);
      a(i, j) = cplx(re, im);
    }
}

}  // namespace

void save_channels_binary(const ChannelSet& ch, std::uint64_t seed,
                          const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, 8);
  put_u32(os, static_cast<std::uint32_t>(ch.n_tx()));
  put_u32(os, static_cast<std::uint32_t>(ch.n_elements()));
  put_u32(os, static_cast<std::uint32_t>(ch.k_r()));
  put_u32(os, static_cast<std::uint32_t>(ch.k_t()));
  put_u64(os, seed);
  const std::string name = Philox::kName;
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_mat(os, ch.g);
  put_mat(os, ch.h_d);
  put_mat(os, ch.h_r);
  put_mat(os, ch.h_t);
  if (!os) throw std::runtime_error("write failed: " + path);
}

ChannelSet load_channels_binary(const std::string& path,
                                std::uint64_t* seed_out,
                                std::string* generator_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("bad magic in " + path);
  const int nt = static_cast<int>(get_u32(is));
  const int m = static_cast<int>(get_u32(is));
  const int kr = static_cast<int>(get_u32(is));
  const int kt = static_cast<int>(get_u32(is));
  const std::uint64_t seed = get_u64(is);
  const std::uint32_t name_len = get_u32(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  ChannelSet ch;
  ch.g.resize(m, nt);
  ch.h_d.resize(nt, kr);
  ch.h_r.resize(m, kr);
  ch.h_t.resize(m, kt);
  get_mat(is, ch.g);
  get_mat(is, ch.h_d);
  get_mat(is, ch.h_r);
  get_mat(is, ch.h_t);
  if (!is) throw std::runtime_error("truncated channel file: " + path);
  if (seed_out) *seed_out = seed;
  if (generator_out) *generator_out = name;
  ch.validate();
  return ch;
}

}  // namespace iosim
