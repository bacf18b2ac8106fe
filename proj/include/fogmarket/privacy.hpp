// Copyright 2026 The fogmarket Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "fogmarket/admm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fogmarket {

/// Endpoint id of the aggregating platform in transcripts.
inline constexpr long kPlatform = -1;

enum class MessageKind { mask, submission };

inline const char* to_string(MessageKind k) { return k == MessageKind::mask ? "mask" : "submission"; }

inline std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data, size, md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int k = 0; k < len; ++k) os << std::setw(2) << static_cast<int>(md[k]);
  return os.str();
}

/// Digest of the raw payload bytes.
inline std::string payload_digest(const ItemVector& v) {
  return sha256_hex(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

struct Message {
  std::size_t round = 0;
  long from = 0;
  long to = 0;
  MessageKind kind = MessageKind::mask;
  ItemVector payload;
};

/// Everything exchanged in one averaging round.
struct MaskingRound {
  std::size_t round = 0;
  /// Outbound neighbors N_i.
  std::vector<std::vector<std::size_t>> neighbors;
  /// Kept share y_i^0.
  std::vector<ItemVector> own_share;
  /// Outbound shares y_i^l, aligned with neighbors[i].
  std::vector<std::vector<ItemVector>> shares;
  /// Masked submissions z_i.
  std::vector<ItemVector> submissions;
  /// Delivery order: all masks, then all submissions.
  std::vector<Message> messages;
  long aggregator = kPlatform;

  /// Services l with i in N_l.
  std::vector<std::size_t> inbound(std::size_t i) const {
    std::vector<std::size_t> in;
    for (std::size_t l = 0; l < neighbors.size(); ++l) {
      if (std::find(neighbors[l].begin(), neighbors[l].end(), i) != neighbors[l].end()) {
        in.push_back(l);
      }
    }
    return in;
  }
};

/// Masks to replay instead of drawing fresh ones; only used to demonstrate
/// why reuse is unsafe.
struct ReusedMasks {
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<ItemVector> own_share;
  std::vector<std::vector<ItemVector>> shares;
};

inline ReusedMasks masks_of(const MaskingRound& r) { return {r.neighbors, r.own_share, r.shares}; }

struct MaskingResult {
  ItemVector average;
  MaskingRound round;
};

struct MaskingOptions {
  std::size_t neighbors = 2;
  /// Mask amplitude; 0 selects 10 times the largest submitted magnitude.
  double amplitude = 0.0;
  long aggregator = kPlatform;
  std::size_t round = 0;
};

/// Zero-sum masking: service i splits uniform noise into shares y_i^l sent
/// to b random peers and keeps y_i^0 = -sum_l y_i^l, then submits
/// z_i = x_i + y_i^0 + sum of received shares. The masks cancel in the sum.
inline MaskingResult run_masking_round(const std::vector<ItemVector>& x, std::mt19937_64& rng,
                                       const MaskingOptions& opts = {},
                                       const ReusedMasks* reuse = nullptr) {
  const std::size_t n = x.size();
  if (n < 2) throw Error("masking: need at least two services");
  if (opts.neighbors < 1 || opts.neighbors > n - 1) {
    throw Error("masking: neighbor count must lie in [1, N-1]");
  }
  const auto k = x.front().size();
  for (const auto& v : x) {
    if (v.size() != k) throw Error("masking: submissions differ in length");
  }
  double amp = opts.amplitude;
  if (!(amp > 0.0)) {
    double mx = 0.0;
    for (const auto& v : x) mx = std::max(mx, v.cwiseAbs().maxCoeff());
    amp = mx > 0.0 ? 10.0 * mx : 1.0;
  }

  MaskingRound rd;
  rd.round = opts.round;
  rd.aggregator = opts.aggregator;
  if (reuse) {
    rd.neighbors = reuse->neighbors;
    rd.own_share = reuse->own_share;
    rd.shares = reuse->shares;
  } else {
    std::uniform_real_distribution<double> unif(-amp, amp);
    rd.neighbors.resize(n);
    rd.own_share.resize(n);
    rd.shares.resize(n);
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < n; ++i) {
      others.clear();
      for (std::size_t l = 0; l < n; ++l) {
        if (l != i) others.push_back(l);
      }
      std::shuffle(others.begin(), others.end(), rng);
      rd.neighbors[i].assign(others.begin(),
                             others.begin() + static_cast<std::ptrdiff_t>(opts.neighbors));
      std::sort(rd.neighbors[i].begin(), rd.neighbors[i].end());
      ItemVector total = ItemVector::Zero(k);
      for (std::size_t m = 0; m < opts.neighbors; ++m) {
        ItemVector y(k);
        for (Eigen::Index c = 0; c < k; ++c) y(c) = unif(rng);
        total += y;
        rd.shares[i].push_back(std::move(y));
      }
      rd.own_share[i] = -total;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < rd.neighbors[i].size(); ++m) {
      rd.messages.push_back({rd.round, static_cast<long>(i), static_cast<long>(rd.neighbors[i][m]),
                             MessageKind::mask, rd.shares[i][m]});
    }
  }
  rd.submissions.resize(n);
  for (std::size_t i = 0; i < n; ++i) rd.submissions[i] = x[i] + rd.own_share[i];
  for (const auto& msg : rd.messages) rd.submissions[static_cast<std::size_t>(msg.to)] += msg.payload;
  for (std::size_t i = 0; i < n; ++i) {
    rd.messages.push_back({rd.round, static_cast<long>(i), rd.aggregator, MessageKind::submission,
                           rd.submissions[i]});
  }

  MaskingResult out;
  out.average = tree_sum(rd.submissions) / static_cast<double>(n);
  out.round = std::move(rd);
  return out;
}

inline MaskingResult run_masking_round(const std::vector<ItemVector>& x, std::size_t b,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MaskingOptions opts;
  opts.neighbors = b;
  return run_masking_round(x, rng, opts);
}

/// Sum_i n_i + N: one message per mask share plus one submission each.
inline std::size_t message_count(std::size_t services, std::size_t b) { return services * b + services; }

/// Averaging through masked submissions. Peer mode sends submissions to
/// service 0 instead of the platform.
class MaskedAveraging final : public AveragingTransport {
 public:
  MaskedAveraging(std::size_t neighbors, std::uint64_t seed,
                  Aggregator aggregator = Aggregator::platform, bool keep_transcript = false)
      : rng_(seed), keep_(keep_transcript) {
    opts_.neighbors = neighbors;
    opts_.aggregator = aggregator == Aggregator::peer ? 0 : kPlatform;
  }

  ItemVector average(const std::vector<ItemVector>& submissions) override {
    auto res = run_masking_round(submissions, rng_, opts_);
    ++opts_.round;
    messages_ += res.round.messages.size();
    if (keep_) rounds_.push_back(std::move(res.round));
    return res.average;
  }
  std::string name() const override { return "masked"; }

  const std::vector<MaskingRound>& rounds() const { return rounds_; }
  std::size_t messages_sent() const { return messages_; }

 private:
  std::mt19937_64 rng_;
  MaskingOptions opts_;
  bool keep_;
  std::vector<MaskingRound> rounds_;
  std::size_t messages_ = 0;
};

/// Channels the adversary can read. A channel is an unordered endpoint pair.
class Compromise {
 public:
  void add(long a, long b) { channels_.insert(key(a, b)); }
  bool contains(long a, long b) const { return channels_.count(key(a, b)) > 0; }

  /// Every channel touching service i in the round: its submission channel
  /// and the channels to all of L_i.
  static Compromise around(const MaskingRound& rd, std::size_t i) {
    Compromise c;
    const long me = static_cast<long>(i);
    c.add(me, rd.aggregator);
    for (auto l : rd.neighbors[i]) c.add(me, static_cast<long>(l));
    for (auto l : rd.inbound(i)) c.add(me, static_cast<long>(l));
    return c;
  }

 private:
  static std::pair<long, long> key(long a, long b) { return {std::min(a, b), std::max(a, b)}; }
  std::set<std::pair<long, long>> channels_;
};

/// Reconstructs x_i from the messages on compromised channels:
///   x_i = z_i + sum_{l in N_i} y_i^l - sum_{l in I_i} y_l^i.
/// Returns nothing unless every required message was observed.
inline std::optional<ItemVector> adversary_replay(const MaskingRound& rd, const Compromise& seen,
                                                  std::size_t i) {
  const long me = static_cast<long>(i);
  std::optional<ItemVector> z;
  std::vector<const Message*> out_masks, in_masks;
  for (const auto& msg : rd.messages) {
    if (!seen.contains(msg.from, msg.to)) continue;
    if (msg.kind == MessageKind::submission && msg.from == me) z = msg.payload;
    if (msg.kind == MessageKind::mask && msg.from == me) out_masks.push_back(&msg);
    if (msg.kind == MessageKind::mask && msg.to == me) in_masks.push_back(&msg);
  }
  if (!z || out_masks.size() != rd.neighbors[i].size() || in_masks.size() != rd.inbound(i).size()) {
    return std::nullopt;
  }
  ItemVector x = *z;
  for (const auto* m : out_masks) x += m->payload;
  for (const auto* m : in_masks) x -= m->payload;
  return x;
}

/// With masks reused across two rounds, z_i' - z_i = x_i' - x_i: the
/// submissions alone leak the change in service i's iterate.
inline ItemVector mask_reuse_difference(const MaskingRound& first, const MaskingRound& second,
                                        std::size_t i) {
  return second.submissions[i] - first.submissions[i];
}

struct ThreatModel {
  /// Per-channel compromise probability P_i.
  double p = 0.0;
  /// Q_i(m) for m = 0, 1, ...: law of the number of inbound-only contacts.
  std::vector<double> q{1.0};
  bool platform_corrupt = false;
};

/// P^(n+1) sum_m Q(m) P^m with an honest platform, P^n sum_m Q(m) P^m when
/// the platform is corrupt.
inline double breach_probability(const ThreatModel& model, std::size_t n_i) {
  if (model.p < 0.0 || model.p > 1.0) throw Error("breach: P must lie in [0, 1]");
  double mass = 0.0, tail = 0.0;
  for (std::size_t m = 0; m < model.q.size(); ++m) {
    if (model.q[m] < 0.0 || model.q[m] > 1.0) throw Error("breach: Q(m) must lie in [0, 1]");
    mass += model.q[m];
    tail += model.q[m] * std::pow(model.p, static_cast<double>(m));
  }
  if (std::abs(mass - 1.0) > 1e-9) throw Error("breach: Q must sum to 1");
  const double exponent = static_cast<double>(n_i) + (model.platform_corrupt ? 0.0 : 1.0);
  return std::pow(model.p, exponent) * tail;
}

/// Empirical Q(m) under uniform neighbor selection, pooled over services.
inline std::vector<double> estimate_inbound_distribution(std::size_t services, std::size_t b,
                                                         std::size_t rounds, std::uint64_t seed) {
  if (services < 2 || b < 1 || b > services - 1) throw Error("breach: invalid N or b");
  std::mt19937_64 rng(seed);
  std::vector<double> counts(services, 0.0);
  std::vector<std::size_t> others;
  for (std::size_t t = 0; t < rounds; ++t) {
    std::vector<std::vector<char>> out(services, std::vector<char>(services, 0));
    for (std::size_t i = 0; i < services; ++i) {
      others.clear();
      for (std::size_t l = 0; l < services; ++l) {
        if (l != i) others.push_back(l);
      }
      std::shuffle(others.begin(), others.end(), rng);
      for (std::size_t m = 0; m < b; ++m) out[i][others[m]] = 1;
    }
    for (std::size_t i = 0; i < services; ++i) {
      std::size_t inbound_only = 0;
      for (std::size_t l = 0; l < services; ++l) {
        if (out[l][i] && !out[i][l]) ++inbound_only;
      }
      counts[inbound_only] += 1.0;
    }
  }
  const double total = static_cast<double>(rounds * services);
  while (counts.size() > 1 && counts.back() == 0.0) counts.pop_back();
  for (auto& c : counts) c /= total;
  return counts;
}

}  // namespace fogmarket
