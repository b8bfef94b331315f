// SPDX-License-Identifier: Apache-2.0
#include "distilforge/verify.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "distilforge/data.hpp"
#include "distilforge/grad_check.hpp"
#include "distilforge/kernels.hpp"
#include "distilforge/losses.hpp"
#include "distilforge/model.hpp"
#include "distilforge/oracle.hpp"
#include "distilforge/rng.hpp"
#include "distilforge/trainer.hpp"

namespace distilforge {

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kOracleTolerance = 1e-10;

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::vector<double> v(r * c);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return Tensor::from({r, c}, std::move(v));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

bool bits_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

CheckResult check_huber(const VerifyOptions& opt) {
  const auto& h = opt.huber;
  struct Case {
    double a, b, expected;
  };
  const Case cases[] = {{2.0, 0.0, 1.5}, {0.5, 0.0, 0.125}, {0.0, 2.0, 1.5},
                        {-3.0, 1.0, 3.5}, {0.7, 0.7, 0.0},  {1.0, 0.0, 0.5}};
  for (const auto& c : cases) {
    const double got = h(c.a, c.b);
    if (got != c.expected)
      return {"huber values", false,
              "huber(" + fmt(c.a) + "," + fmt(c.b) + ") = " + fmt(got) + ", expected " +
                  fmt(c.expected)};
  }
  // Tensor Huber must agree with the scalar definition on both branches.
  Rng rng(opt.seed);
  Tensor a = random_matrix(rng, 1, 64, 3.0);
  Tensor b = random_matrix(rng, 1, 64, 3.0);
  Tensor t = huber(a, b);
  for (std::size_t i = 0; i < 64; ++i)
    if (std::abs(t.at(i) - h(a.at(i), b.at(i))) > 1e-15)
      return {"huber values", false, "tensor and scalar Huber disagree at " + std::to_string(i)};
  return {"huber values", true, "both branches match"};
}

CheckResult check_softmax(const VerifyOptions& opt) {
  Rng rng(opt.seed + 1);
  double worst = 0.0;
  for (double scale : {1.0, 10.0, 1e3}) {
    Tensor z = random_matrix(rng, 8, 5, scale);
    for (double t : {0.5, 1.0, 3.0}) {
      Tensor p = softmax_with_temperature(z, t);
      for (std::size_t r = 0; r < 8; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 5; ++c) s += p.at(r, c);
        worst = std::max(worst, std::abs(s - 1.0));
      }
    }
  }
  return {"softmax rows sum to one", worst < 1e-9, "max deviation " + fmt(worst)};
}

CheckResult check_kl(const VerifyOptions& opt) {
  Rng rng(opt.seed + 2);
  double min_kl = 1.0, same = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor s = random_matrix(rng, 4, 3, 3.0);
    Tensor t = random_matrix(rng, 4, 3, 3.0);
    min_kl = std::min(min_kl, kl_mutual(s, t).item());
    min_kl = std::min(min_kl, self_distill_kl(s, t, 3.0).item());
    same = std::max(same, std::abs(kl_mutual(s, s.clone()).item()));
  }
  const bool ok = min_kl >= 0.0 && same <= 1e-12;
  return {"kl non-negative, zero on identical", ok,
          "min " + fmt(min_kl) + ", identical " + fmt(same)};
}

CheckResult check_oracles(const VerifyOptions& opt) {
  Rng rng(opt.seed + 3);
  double worst = 0.0;
  LossWeights w;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 3);
    Tensor a = random_matrix(rng, n, 3);
    Tensor b = random_matrix(rng, n, 3);
    const TupleSets tuples = TupleSets::build(n, rng.next());
    const RelationLoss rl = relation_distill_loss(a, b, tuples, w);
    const auto ra = oracle::to_rows(a), rb = oracle::to_rows(b);
    worst = std::max(worst, std::abs(rl.distance.item() - oracle::distance_loss(ra, rb)));
    worst = std::max(worst, std::abs(rl.angle.item() - oracle::angle_loss(ra, rb)));
  }
  return {"tuple oracle equivalence", worst <= kOracleTolerance, "max diff " + fmt(worst)};
}

CheckResult check_invariance(const VerifyOptions& opt) {
  Rng rng(opt.seed + 4);
  double worst = 0.0;
  LossWeights w;
  for (double lambda : {0.5, 2.0, 10.0}) {
    Tensor e = random_matrix(rng, 5, 3);
    std::vector<double> moved(e.data().begin(), e.data().end());
    const double shift[3] = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = lambda * moved[i] + shift[i % 3];
    const Tensor f = Tensor::from({5, 3}, moved);
    const TupleSets tuples = TupleSets::build(5, 7);
    worst = std::max(worst, std::abs(relation_distill_loss(e, f, tuples, w).total.item()));
    const DistancePotentials dp = distance_potentials(f);
    worst = std::max(worst, std::abs(sum(dp.values).item() / 20.0 - 1.0));
  }
  return {"relational invariance", worst <= 1e-9, "max deviation " + fmt(worst)};
}

CheckResult check_gradients(const VerifyOptions& opt) {
  double worst = 0.0;
  std::string which;
  for (const auto& [name, err] : loss_gradient_errors(opt.seed + 5)) {
    if (err > worst) {
      worst = err;
      which = name;
    }
  }
  return {"loss gradients vs finite differences", worst < kGradTolerance,
          "worst " + fmt(worst) + (which.empty() ? "" : " (" + which + ")")};
}

CheckResult check_kernels(const VerifyOptions& opt) {
  Rng rng(opt.seed + 6);
  const std::size_t m = 37, k = 29, n = 41;
  const Tensor a = random_matrix(rng, m, k), b = random_matrix(rng, k, n);
  const Tensor g = random_matrix(rng, m, n);
  std::vector<double> s1(m * n), p1(m * n), s2(k * n), p2(k * n), s3(m * k), p3(m * k);
  kernels::serial::matmul(a.data(), b.data(), s1, m, k, n);
  kernels::parallel::matmul(a.data(), b.data(), p1, m, k, n);
  kernels::serial::matmul_at_b(a.data(), g.data(), s2, m, k, n);
  kernels::parallel::matmul_at_b(a.data(), g.data(), p2, m, k, n);
  kernels::serial::matmul_a_bt(g.data(), b.data(), s3, m, k, n);
  kernels::parallel::matmul_a_bt(g.data(), b.data(), p3, m, k, n);
  const Tensor e = random_matrix(rng, 50, 7);
  std::vector<double> sd(2500), pd(2500);
  kernels::serial::pairwise_l2(e.data(), sd, 50, 7);
  kernels::parallel::pairwise_l2(e.data(), pd, 50, 7);
  const bool ok = bits_equal(s1, p1) && bits_equal(s2, p2) && bits_equal(s3, p3) &&
                  bits_equal(sd, pd);
  return {"serial and parallel kernels agree", ok, ok ? "bit-identical" : "outputs differ"};
}

CheckResult check_determinism(const VerifyOptions& opt) {
  auto once = [&] {
    Dataset train = synth_blobs({3, 20, 2, 0.5, opt.seed});
    TrainConfig cfg;
    cfg.stage1_epochs = 2;
    cfg.stage2_epochs = 2;
    cfg.batch_size = 16;
    cfg.lr_milestones = {1};
    cfg.seed = opt.seed;
    NetworkConfig nc{2, {8, 4}, 3, 11};
    NetworkConfig nc2{2, {6, 4}, 3, 12};
    PeerPair nets{PeerNetwork(nc), PeerNetwork(nc2)};
    Stage1Result s1 = pretrain_stage1(nets, train, train, cfg);
    auto metrics = train_stage2(nets, s1.snapshots, train, train, cfg);
    metrics.insert(metrics.begin(), s1.metrics.begin(), s1.metrics.end());
    return std::make_pair(std::move(metrics), std::move(nets));
  };
  auto [m1, n1] = once();
  auto [m2, n2] = once();
  const bool ok = m1 == m2 && same_parameters(n1[0], n2[0]) && same_parameters(n1[1], n2[1]);
  return {"determinism replay", ok, ok ? "identical metrics and parameters" : "runs diverged"};
}

CheckResult check_schedule() {
  TrainConfig cfg;
  cfg.stage2_epochs = 200;
  cfg.lr = 0.1;
  cfg.lr_milestones = {60, 120, 160};
  cfg.lr_factor = 0.2;
  const bool ok = lr_at(0, cfg) == 0.1 && lr_at(59, cfg) == 0.1 && lr_at(60, cfg) == 0.02 &&
                  lr_at(161, cfg) == 0.0008;
  return {"learning-rate schedule", ok, ok ? "0.1 -> 0.02 -> 0.0008" : "schedule mismatch"};
}

}  // namespace

VerifyOptions verify_options(std::string_view fault) {
  VerifyOptions opt;
  opt.huber = [](double a, double b) { return huber(a, b); };
  if (fault == "huber") {
    // Mutant: wrong offset on the linear branch.
    opt.huber = [](double a, double b) {
      const double r = std::abs(a - b);
      return r <= 1.0 ? 0.5 * r * r : r - 0.25;
    };
  } else if (!fault.empty()) {
    throw std::invalid_argument("inject-fault: unknown fault '" + std::string(fault) + "'");
  }
  return opt;
}

std::vector<std::pair<std::string, double>> loss_gradient_errors(std::uint64_t seed) {
  Rng rng(seed);
  PeerNetwork net(NetworkConfig{3, {6, 4}, 3, seed});
  const PeerNetwork peer(NetworkConfig{3, {5, 4}, 3, seed + 1});
  const PeerNetwork snapshot = PeerNetwork(NetworkConfig{3, {6, 4}, 3, seed + 2}).snapshot();

  const Tensor x = random_matrix(rng, 4, 3);
  std::vector<std::size_t> labels{0, 1, 2, static_cast<std::size_t>(rng.below(3))};
  std::vector<double> oh(12, 0.0);
  for (std::size_t i = 0; i < 4; ++i) oh[i * 3 + labels[i]] = 1.0;
  const Tensor one_hot = Tensor::from({4, 3}, oh);

  ForwardOutput peer_out;
  Tensor snap_logits;
  {
    NoGradGuard no_grad;
    peer_out = peer.forward(x);
    snap_logits = snapshot.forward(x).logits;
  }
  const TupleSets tuples = TupleSets::build(4, seed);
  const LossWeights w;

  std::vector<Tensor> params;
  for (auto& p : net.parameters()) params.push_back(p.value);

  using Fn = std::function<Tensor(const ForwardOutput&)>;
  const std::vector<std::pair<std::string, Fn>> losses = {
      {"CE", [&](const ForwardOutput& o) { return cross_entropy(o.logits, one_hot); }},
      {"KL", [&](const ForwardOutput& o) { return kl_mutual(o.logits, peer_out.logits); }},
      {"SD", [&](const ForwardOutput& o) { return self_distill_kl(o.logits, snap_logits, w.temperature); }},
      {"DD", [&](const ForwardOutput& o) {
         return relation_distill_loss(o.embedding, peer_out.embedding, tuples, w).distance;
       }},
      {"AD", [&](const ForwardOutput& o) {
         return relation_distill_loss(o.embedding, peer_out.embedding, tuples, w).angle;
       }},
      {"RD", [&](const ForwardOutput& o) {
         return relation_distill_loss(o.embedding, peer_out.embedding, tuples, w).total;
       }},
      {"MD", [&](const ForwardOutput& o) { return mutual_distill_loss(o, peer_out, tuples, w).total; }},
      {"KD", [&](const ForwardOutput& o) {
         return total_loss(o, peer_out, snap_logits, one_hot, tuples, w).total;
       }},
  };

  std::vector<std::pair<std::string, double>> out;
  for (const auto& [name, loss] : losses) {
    const double err = grad_check_parameters([&] { return loss(net.forward(x)); }, params);
    out.emplace_back(name, err);
  }
  return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  VerifyOptions opt = options;
  if (!opt.huber) opt.huber = verify_options().huber;
  std::vector<CheckResult> results;
  results.push_back(check_huber(opt));
  results.push_back(check_softmax(opt));
  results.push_back(check_kl(opt));
  results.push_back(check_oracles(opt));
  results.push_back(check_invariance(opt));
  results.push_back(check_gradients(opt));
  results.push_back(check_kernels(opt));
  results.push_back(check_determinism(opt));
  results.push_back(check_schedule());
  return results;
}

}  // namespace distilforge
