#include "rwre/regeneration.hpp"

#include "rwre/errors.hpp"

#include <cmath>

namespace rwre::regen {

RegenConfig RegenConfig::make(const Eigen::VectorXd& direction, std::int64_t horizon,
                              std::optional<double> a, std::optional<double> depth) {
  RegenConfig cfg;
  cfg.direction = direction;
  cfg.horizon = horizon;
  cfg.a = a.value_or(2.0 * std::sqrt(static_cast<double>(direction.size())) + 0.5);
  cfg.confirmation_depth = depth.value_or(50.0 * cfg.a);
  cfg.validate();
  return cfg;
}

void RegenConfig::validate() const {
  const auto d = static_cast<double>(direction.size());
  lattice::require_dimension(static_cast<int>(direction.size()));
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw ParameterError("regeneration direction must be a unit vector");
  if (!(a > 2.0 * std::sqrt(d)))
    throw ParameterError("regeneration level increment a must exceed 2 sqrt(d) = " +
                         std::to_string(2.0 * std::sqrt(d)));
  if (horizon < 1) throw ParameterError("regeneration horizon must be positive");
  if (!(confirmation_depth >= 0.0)) throw ParameterError("confirmation depth must be nonnegative");
}

std::vector<std::int64_t> RegenerationRecord::gaps() const {
  std::vector<std::int64_t> g;
  for (std::size_t k = 1; k < times.size(); ++k) g.push_back(times[k] - times[k - 1]);
  return g;
}

std::vector<Eigen::VectorXd> RegenerationRecord::displacement_gaps() const {
  std::vector<Eigen::VectorXd> g;
  for (std::size_t k = 1; k < positions.size(); ++k)
    g.push_back((positions[k] - positions[k - 1]).to_vector());
  return g;
}

std::vector<std::int64_t> regeneration_indices(std::span<const double> level, double a,
                                               double confirmation_depth, bool* censored_tail) {
  const auto H = static_cast<std::int64_t>(level.size()) - 1;
  // next_lower[n]: first m > n with level[m] < level[n], or -1.
  std::vector<std::int64_t> next_lower(level.size(), -1);
  {
    std::vector<std::int64_t> stack;
    for (std::int64_t n = H; n >= 0; --n) {
      while (!stack.empty() && level[stack.back()] >= level[n]) stack.pop_back();
      next_lower[n] = stack.empty() ? -1 : stack.back();
      stack.push_back(n);
    }
  }

  std::vector<std::int64_t> taus;
  bool censored = true;
  std::int64_t epoch = 0;  // 0, then tau_1, tau_2, ...
  while (epoch <= H) {
    // One pass of the recursion on the path shifted to `epoch`.
    double M = level[epoch];
    std::int64_t cur = epoch;
    std::int64_t accepted = -1;
    bool exhausted = false;
    for (;;) {
      // S = T^l_{M + a}: every index <= cur has level <= M.
      std::int64_t S = cur;
      while (S <= H && level[S] < M + a) ++S;
      if (S > H) {
        exhausted = true;
        break;
      }
      const std::int64_t R = next_lower[S];
      if (R < 0) {
        // No backtrack before the horizon; confirm by depth.
        if (level[H] - level[S] >= confirmation_depth) accepted = S;
        else exhausted = true;
        break;
      }
      for (std::int64_t n = S; n <= R; ++n) M = std::max(M, level[n]);
      cur = R;
    }
    if (exhausted) break;
    taus.push_back(accepted);
    epoch = accepted;
    if (epoch == H) {
      censored = false;
      break;
    }
  }
  if (censored_tail) *censored_tail = censored;
  return taus;
}

RegenerationRecord find_regenerations(const walk::Trajectory& path, const RegenConfig& cfg) {
  cfg.validate();
  if (path.start.dim() != cfg.direction.size())
    throw DimensionError("path and regeneration direction dimensions differ");
  const std::vector<double> level = path.projections(cfg.direction);
  RegenerationRecord rec;
  rec.horizon = static_cast<std::int64_t>(path.length());
  rec.times = regeneration_indices(level, cfg.a, cfg.confirmation_depth, &rec.censored_tail);

  const int d = path.start.dim();
  Site x = path.start;
  std::size_t next = 0;
  for (std::int64_t n = 0; n <= rec.horizon; ++n) {
    while (next < rec.times.size() && rec.times[next] == n) {
      rec.positions.push_back(x);
      rec.levels.push_back(level[static_cast<std::size_t>(n)]);
      ++next;
    }
    if (n < rec.horizon) {
      const int k = path.steps[static_cast<std::size_t>(n)];
      x[k % d] += k < d ? 1 : -1;
    }
  }
  rec.end = x;
  return rec;
}

RegenerationRecord find_regenerations(const env::QuenchedEnvironment& env, const Site& start,
                                      const RegenConfig& cfg, Rng& rng) {
  cfg.validate();
  return find_regenerations(walk::walk(env, start, cfg.horizon, rng), cfg);
}

RenewalStats renewal_statistics(std::span<const RegenerationRecord> records) {
  RenewalStats st;
  std::vector<double> dt;
  std::vector<Eigen::VectorXd> dx;
  int d = 0;
  for (const auto& rec : records) {
    if (rec.times.size() < 2) {
      ++st.censored_records;
      continue;
    }
    ++st.records_used;
    for (auto g : rec.gaps()) dt.push_back(static_cast<double>(g));
    for (auto& v : rec.displacement_gaps()) {
      d = static_cast<int>(v.size());
      dx.push_back(std::move(v));
    }
  }
  if (dt.empty())
    throw InsufficientDataError("no record has two regenerations (" +
                                    std::to_string(st.censored_records) + " censored records)",
                                st.censored_records);

  const auto n = static_cast<double>(dt.size());
  st.n_gaps = dt.size();
  double sum_t = 0.0, sum_t2 = 0.0;
  Eigen::VectorXd sum_x = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < dt.size(); ++i) {
    sum_t += dt[i];
    sum_t2 += dt[i] * dt[i];
    sum_x += dx[i];
  }
  st.gap_mean = sum_t / n;
  st.gap_second_moment = sum_t2 / n;
  st.velocity = sum_x / sum_t;

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < dt.size(); ++i) {
    const Eigen::VectorXd r = dx[i] - st.velocity * dt[i];
    S += r * r.transpose();
  }
  S /= n;
  st.covariance = S / st.gap_mean;
  st.velocity_se = (S.diagonal() / n).cwiseSqrt() / st.gap_mean;
  return st;
}

}  // namespace rwre::regen
