#include <doctest.h>

#include <cstdio>

#include "iosim/channel.hpp"
#include "test_util.hpp"

using namespace iosim;
using namespace iosim::testutil;

TEST_CASE("path loss reference point and scaling") {
  CHECK(path_loss(1.0, 2.5) == doctest::Approx(1e-3));
  CHECK(path_loss(1.0, 3.5) == doctest::Approx(1e-3));
  CHECK(path_loss(10.0, 2.0) == doctest::Approx(1e-5));
  CHECK(path_loss(50.0, 2.5) == doctest::Approx(5.65685424949238e-8));
  CHECK_THROWS_AS(path_loss(0.0, 2.5), std::invalid_argument);
  CHECK_THROWS_AS(path_loss(-1.0, 2.5), std::invalid_argument);
}

TEST_CASE("user distance from the deployment triangle") {
  CHECK(user_distance(50.0, 2.0, M_PI / 2.0) == doctest::Approx(48.0));
  CHECK(user_distance(50.0, 2.0, 0.0) == doctest::Approx(std::sqrt(2504.0)));
  // collinear boundary: distance collapses to zero, caller must reject
  CHECK(user_distance(1.0, 1.0, M_PI / 2.0) == doctest::Approx(0.0));
}

TEST_CASE("sampling is deterministic in the seed") {
  SystemConfig cfg = unit_config(4, 8, 2, 2);
  cfg.seed = 42;
  const ChannelSet a = sample_channels(cfg);
  const ChannelSet b = sample_channels(cfg);
  CHECK((a.g - b.g).norm() == 0.0);
  CHECK((a.h_d - b.h_d).norm() == 0.0);
  CHECK((a.h_r - b.h_r).norm() == 0.0);
  CHECK((a.h_t - b.h_t).norm() == 0.0);
  cfg.seed = 43;
  const ChannelSet c = sample_channels(cfg);
  CHECK((a.g - c.g).norm() > 0.0);
}

TEST_CASE("no transmitted users means an empty h_t block") {
  SystemConfig cfg = unit_config(2, 4, 1, 0);
  const ChannelSet ch = sample_channels(cfg);
  CHECK(ch.h_t.cols() == 0);
  CHECK(ch.h_r.cols() == 1);
}

TEST_CASE("per-entry second moment matches the link path loss") {
  SystemConfig cfg;
  cfg.n_tx = 10;
  cfg.n_elements = 100;
  cfg.k_r = 1;
  cfg.k_t = 1;
  cfg.sinr_targets_r = RVec::Constant(1, 1.0);
  cfg.sinr_targets_t = RVec::Constant(1, 1.0);
  cfg.seed = 9001;

  // 1e5 entries of G across 100 realizations
  double acc = 0.0;
  long n = 0;
  for (int rep = 0; rep < 100; ++rep) {
    cfg.seed = 9001 + rep;
    const ChannelSet ch = sample_channels(cfg);
    acc += ch.g.squaredNorm();
    n += ch.g.size();
  }
  const double mean = acc / static_cast<double>(n);
  const double expect = path_loss(50.0, 2.5);
  // |x|^2 is exponential: sd of the mean is expect / sqrt(n); allow 3 sigma
  // and require the 2 percent envelope.
  CHECK(std::abs(mean - expect) < 3.0 * expect / std::sqrt(double(n)));
  CHECK(std::abs(mean - expect) / expect < 0.02);
}

TEST_CASE("fixed user angles override the random placement") {
  SystemConfig cfg = unit_config(2, 2, 1, 0);
  cfg.geometry.delta_r = {M_PI / 2.0};
  cfg.seed = 5;
  const ChannelSet a = sample_channels(cfg);
  // At delta = pi/2 the BS-user distance is 48 m; the direct-link variance
  // must match that path loss.
  double acc = 0.0;
  long n = 0;
  for (int rep = 0; rep < 4000; ++rep) {
    cfg.seed = 100 + rep;
    acc += sample_channels(cfg).h_d.squaredNorm();
    n += 2;
  }
  const double expect = path_loss(48.0, 3.5);
  CHECK(std::abs(acc / n - expect) < 5.0 * expect / std::sqrt(double(n)));
  (void)a;
}

TEST_CASE("json round trip preserves every entry") {
  Philox rng(13);
  SystemConfig cfg = unit_config(3, 5, 2, 1);
  cfg.seed = 77;
  const ChannelSet ch = sample_channels(cfg);
  const std::string text = channels_to_json(ch, cfg.seed);
  const ChannelSet back = channels_from_json(text);
  CHECK((ch.g - back.g).norm() == 0.0);
  CHECK((ch.h_d - back.h_d).norm() == 0.0);
  CHECK((ch.h_r - back.h_r).norm() == 0.0);
  CHECK((ch.h_t - back.h_t).norm() == 0.0);
}

TEST_CASE("binary round trip preserves entries and header") {
  SystemConfig cfg = unit_config(4, 6, 2, 2);
  cfg.seed = 1234567;
  const ChannelSet ch = sample_channels(cfg);
  const std::string path = "channels_test.bin";
  save_channels_binary(ch, cfg.seed, path);
  std::uint64_t seed = 0;
  std::string gen;
  const ChannelSet back = load_channels_binary(path, &seed, &gen);
  CHECK(seed == cfg.seed);
  CHECK(gen == Philox::kName);
  CHECK((ch.g - back.g).norm() == 0.0);
  CHECK((ch.h_d - back.h_d).norm() == 0.0);
  CHECK((ch.h_r - back.h_r).norm() == 0.0);
  CHECK((ch.h_t - back.h_t).norm() == 0.0);
  std::remove(path.c_str());
}
