#include "whatif/reg_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace whatif {

namespace {

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

std::size_t RegConfig::sample_count(std::size_t k, std::size_t d) const {
  if (sample_override) return *sample_override;
  const double kd = static_cast<double>(k);
  const double dd = static_cast<double>(d);
  const double v = constant / epsilon * kd * dd * std::log2(std::max(dd, 2.0)) * (kd + std::log2(1.0 / delta));
  return std::max<std::size_t>(static_cast<std::size_t>(std::ceil(v)), d);
}

void RegConfig::check() const {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must be in (0,1)");
  if (!(constant > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample constant must be positive");
}

bool RegSample::operator==(const RegSample& o) const {
  return id == o.id && target == o.target && rates == o.rates && same(features, o.features);
}

std::uint32_t quantize_rate(double p, std::size_t n) {
  if (p <= 0.0) return 0;
  const double units = std::ceil(p * static_cast<double>(n) - 1e-9);
  return static_cast<std::uint32_t>(std::max(1.0, units));
}

std::vector<HypLeverage> leverage_profiles(const RegInstance& inst,
                                           const std::vector<std::vector<std::size_t>>& members) {
  std::vector<HypLeverage> out(members.size());
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  for (std::size_t i = 0; i < members.size(); ++i) {
    out[i].positions = members[i];
    if (members[i].empty()) continue;
    inst.stack(members[i], a, b);
    const auto lev = leverage_scores(a);
    out[i].rank = lev.rank;
    if (lev.rank > 0) out[i].probabilities = lev.scores / static_cast<double>(lev.rank);
    else out[i].probabilities = Eigen::VectorXd::Zero(a.rows());
  }
  return out;
}

RegSketch RegSketch::compress(const RegInstance& inst, const HypotheticalSet& h, const RegConfig& cfg) {
  cfg.check();
  if (h.k() > 0xffff) throw Error(ErrorCode::InvalidArgument, "too many hypotheticals");
  RegSketch sk;
  sk.k_ = h.k();
  sk.n_ = inst.size();
  sk.dim_ = inst.dim();
  sk.t_ = cfg.sample_count(sk.k_, static_cast<std::size_t>(sk.dim_));

  const auto members = h.positions(inst);
  const auto profiles = leverage_profiles(inst, members);

  // rate units of every (hypothetical, position) pair
  std::vector<std::vector<std::uint32_t>> units(sk.k_, std::vector<std::uint32_t>(sk.n_, 0));
  for (std::size_t i = 0; i < sk.k_; ++i) {
    const HypLeverage& prof = profiles[i];
    if (!prof.positions.empty() && prof.rank == 0)
      throw Error(ErrorCode::DegenerateHypothetical, "hypothetical " + std::to_string(i + 1) + " has rank 0");
    for (std::size_t r = 0; r < prof.positions.size(); ++r)
      units[i][prof.positions[r]] = quantize_rate(prof.probabilities(static_cast<Eigen::Index>(r)), sk.n_);
  }

  std::mt19937_64 perm_gen = substream(cfg.seed, {stream::kRegression, 0xffffffffULL});
  std::vector<std::uint16_t> base(sk.k_);
  std::iota(base.begin(), base.end(), std::uint16_t{0});
  sk.perms_.reserve(sk.t_);
  for (std::size_t l = 0; l < sk.t_; ++l) {
    std::shuffle(base.begin(), base.end(), perm_gen);
    sk.perms_.push_back(base);
  }

  sk.samples_.resize(sk.k_);
  for (std::size_t i = 0; i < sk.k_; ++i) {
    const HypLeverage& prof = profiles[i];
    if (prof.positions.empty()) continue;
    std::mt19937_64 gen = substream(cfg.seed, {stream::kRegression, i});
    std::discrete_distribution<std::size_t> pick(prof.probabilities.data(),
                                                 prof.probabilities.data() + prof.probabilities.size());
    sk.samples_[i].reserve(sk.t_);
    for (std::size_t l = 0; l < sk.t_; ++l) {
      const std::size_t pos = prof.positions[pick(gen)];
      const RegRow& row = inst[pos];
      RegSample s{row.id, row.features, row.target, std::vector<std::uint32_t>(sk.k_)};
      for (std::size_t i2 = 0; i2 < sk.k_; ++i2) s.rates[i2] = units[i2][pos];
      sk.samples_[i].push_back(std::move(s));
    }
  }
  return sk;
}

void RegSketch::resample(const Scenario& s, Eigen::MatrixXd& a, Eigen::VectorXd& b) const {
  s.check(k_);
  // Empty hypotheticals carry zero rates everywhere; dropping them leaves q_j consistent.
  std::vector<std::size_t> live;
  for (std::size_t i : s.on())
    if (!samples_[i].empty()) live.push_back(i);
  if (live.empty())
    throw Error(ErrorCode::EmptyHypothetical, "scenario " + s.to_string() + " turns on only empty hypotheticals");
  const HypMask on(k_, Scenario(live));

  a.resize(static_cast<Eigen::Index>(t_), dim_);
  b.resize(static_cast<Eigen::Index>(t_));
  const double denom = static_cast<double>(n_) * static_cast<double>(live.size());
  for (std::size_t l = 0; l < t_; ++l) {
    std::size_t gamma = k_;
    for (std::uint16_t c : perms_[l])
      if (on.test(c)) {
        gamma = c;
        break;
      }
    const RegSample& smp = samples_[gamma][l];
    double units = 0.0;
    for (std::size_t i : live) units += smp.rates[i];
    const double q = units / denom;
    if (!(q > 0.0)) throw Error(ErrorCode::DegenerateSample, "zero rate for tuple " + std::to_string(smp.id));
    const double scale = 1.0 / std::sqrt(static_cast<double>(t_) * q);
    a.row(static_cast<Eigen::Index>(l)) = smp.features.transpose() * scale;
    b(static_cast<Eigen::Index>(l)) = smp.target * scale;
  }
}

Eigen::VectorXd RegSketch::solve(const Scenario& s) const {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  resample(s, a, b);
  return min_norm_solve(a, b);
}

DisjointRegSketch DisjointRegSketch::compress(const RegInstance& inst, const HypotheticalSet& h) {
  const auto members = h.positions(inst);
  std::vector<std::uint8_t> owned(inst.size(), 0);
  for (const auto& m : members)
    for (std::size_t p : m) {
      if (owned[p]) throw Error(ErrorCode::NotDisjoint, "tuple " + std::to_string(inst[p].id) + " is shared");
      owned[p] = 1;
    }

  DisjointRegSketch sk;
  sk.dim_ = inst.dim();
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  for (const auto& m : members) {
    inst.stack(m, a, b);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(sk.dim_, sk.dim_);
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    sk.gram_.push_back(g.selfadjointView<Eigen::Lower>());
    sk.moment_.push_back(a.transpose() * b);
  }
  return sk;
}

Eigen::VectorXd DisjointRegSketch::solve(const Scenario& s) const {
  s.check(k());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim_, dim_);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_);
  for (std::size_t i : s.on()) {
    g += gram_[i];
    m += moment_[i];
  }
  return min_norm_solve(g, m);
}

bool DisjointRegSketch::operator==(const DisjointRegSketch& o) const {
  if (dim_ != o.dim_ || gram_.size() != o.gram_.size()) return false;
  for (std::size_t i = 0; i < gram_.size(); ++i)
    if (!same(gram_[i], o.gram_[i]) || !same(moment_[i], o.moment_[i])) return false;
  return true;
}

}  // namespace whatif
