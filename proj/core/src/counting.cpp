#include "spsim/counting.hpp"

#include "spsim/rng.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace spsim {

namespace {

constexpr double kmean_floor = 1e-30;        // below this <n> counts as zero
constexpr double kexcitation_guard = 1e-6;   // allowed excited population at the horizon
constexpr double kimag_guard = 1e-10;        // allowed imaginary part of a probability

void check_channel(const SystemModel& model, int channel) {
  if (channel < 0 || channel >= static_cast<int>(model.channels().size()))
    throw std::invalid_argument("channel index out of range");
}

// tr of a column-stacked matrix: sum of the diagonal entries of vec^-1.
complexd vec_trace(const Eigen::Ref<const Eigen::VectorXcd>& v, Eigen::Index d) {
  complexd tr = 0;
  for (Eigen::Index i = 0; i < d; ++i) tr += v(i * (d + 1));
  return tr;
}

double real_probability(complexd value, const char* what) {
  if (std::abs(value.imag()) > kimag_guard) {
    std::ostringstream msg;
    msg << what << ": imaginary part " << value.imag() << " beyond tolerance";
    throw std::runtime_error(msg.str());
  }
  return value.real();
}

void check_horizon_decay(double excited, const char* what) {
  if (excited > kexcitation_guard) {
    std::ostringstream msg;
    msg << what << ": excited population " << excited
        << " at the decay horizon; raise horizon_factor";
    throw std::runtime_error(msg.str());
  }
}

}  // namespace

double PhotocountDistribution::mean() const {
  double m = 0;
  for (std::size_t n = 1; n < probs.size(); ++n) m += static_cast<double>(n) * probs[n];
  return m;
}

double PhotocountDistribution::factorial_moment2() const {
  double m = 0;
  for (std::size_t n = 2; n < probs.size(); ++n)
    m += static_cast<double>(n) * static_cast<double>(n - 1) * probs[n];
  return m;
}

FactorialMoments factorial_moments(const PhotocountDistribution& dist) {
  return {dist.mean(), dist.factorial_moment2()};
}

double g2_from_counts(const PhotocountDistribution& dist) {
  const double mean = dist.mean();
  if (mean < kmean_floor)
    throw std::domain_error("g2_from_counts: <n> is zero, g2 undefined");
  return dist.factorial_moment2() / (mean * mean);
}

double g2_two_photon_approx(const PhotocountDistribution& dist) {
  if (dist.probs.size() < 3)
    throw std::invalid_argument("g2_two_photon_approx: need P0..P2");
  const double p1 = dist.probs[1], p2 = dist.probs[2];
  const double denom = p1 + 2.0 * p2;
  if (denom < kmean_floor)
    throw std::domain_error("g2_two_photon_approx: P1 + 2 P2 is zero");
  return 2.0 * p2 / (denom * denom);
}

NumberResolvedTerminal photocount_blocks(const SystemModel& model,
                                         const PulseEnvelope& pulse, int channel,
                                         int n_max, const IntegrationOptions& opts) {
  check_channel(model, channel);
  if (n_max < 1) throw std::invalid_argument("photocount_blocks: n_max must be >= 1");

  const double horizon = decay_horizon(model, pulse, opts);
  const TimeGrid grid = TimeGrid::build(model, pulse, 0.0, horizon, opts);
  const GeneratorParts gen = GeneratorParts::build(model);
  const Eigen::Index d = model.dim();
  const Eigen::Index d2 = d * d;
  const Eigen::MatrixXcd& jump = gen.jump_parts[channel];
  const Eigen::MatrixXcd nojump = gen.static_part - jump;

  // Columns 0..n_max: number-resolved blocks; last column: unconditional state.
  const Eigen::Index ncols = n_max + 2;
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(d2, ncols);
  const Eigen::VectorXcd rho0 = vectorize(model.ground_state().matrix());
  y.col(0) = rho0;
  y.col(ncols - 1) = rho0;

  rk4_integrate(grid, y,
                [&](Eigen::MatrixXcd& dy, const Eigen::MatrixXcd& s, double,
                    double omega) {
                  dy.leftCols(ncols - 1).noalias() = nojump * s.leftCols(ncols - 1);
                  dy.col(ncols - 1).noalias() = gen.static_part * s.col(ncols - 1);
                  if (omega != 0.0) dy.noalias() += omega * (gen.drive_part * s);
                  for (Eigen::Index n = 1; n <= n_max; ++n)
                    dy.col(n).noalias() += jump * s.col(n - 1);
                });

  NumberResolvedTerminal out;
  out.blocks.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) out.blocks.push_back(devectorize(y.col(n)));
  out.unconditional = devectorize(y.col(ncols - 1));
  return out;
}

PhotocountDistribution photocount_distribution(const SystemModel& model,
                                               const PulseEnvelope& pulse,
                                               int channel, int n_max,
                                               const IntegrationOptions& opts,
                                               double residual_tol) {
  if (!(residual_tol > 0))
    throw std::invalid_argument("photocount_distribution: residual_tol must be positive");
  const NumberResolvedTerminal terminal =
      photocount_blocks(model, pulse, channel, n_max, opts);

  PhotocountDistribution dist;
  dist.channel = model.channels()[channel].name;
  dist.probs.resize(n_max + 1);
  double total = 0;
  for (int n = 0; n <= n_max; ++n) {
    double p = real_probability(terminal.blocks[n].trace(), "photocount_distribution");
    if (p < -kimag_guard) {
      std::ostringstream msg;
      msg << "photocount_distribution: P_" << n << " = " << p << " is negative";
      throw std::runtime_error(msg.str());
    }
    dist.probs[n] = std::max(p, 0.0);
    total += dist.probs[n];
  }

  const double unconditional_trace =
      real_probability(terminal.unconditional.trace(), "photocount_distribution");
  check_horizon_decay(1.0 - terminal.unconditional(0, 0).real(),
                      "photocount_distribution");

  double residual = unconditional_trace - total;
  if (residual < -1e-9)
    throw std::runtime_error("photocount_distribution: negative truncation residual");
  residual = std::max(residual, 0.0);
  if (residual > residual_tol) {
    std::ostringstream msg;
    msg << "photocount_distribution: truncation residual " << residual
        << " exceeds " << residual_tol << "; raise n_max";
    throw std::runtime_error(msg.str());
  }
  dist.residual = residual;
  return dist;
}

FactorialMoments correlator_moments(const SystemModel& model,
                                    const PulseEnvelope& pulse, int channel,
                                    const IntegrationOptions& opts) {
  check_channel(model, channel);
  const double horizon = decay_horizon(model, pulse, opts);
  const TimeGrid grid = TimeGrid::build(model, pulse, 0.0, horizon, opts);
  const GeneratorParts gen = GeneratorParts::build(model);
  const Eigen::Index d = model.dim();
  const Eigen::Index d2 = d * d;
  const Eigen::MatrixXcd& jump = gen.jump_parts[channel];

  // Trace functional of the recycling term: flux(t) = tr[J rho(t)].
  Eigen::RowVectorXcd flux_row = Eigen::RowVectorXcd::Zero(d2);
  for (Eigen::Index i = 0; i < d; ++i) flux_row += jump.row(i * (d + 1));

  // State layout: [vec rho | vec sigma | <n> accumulator | <n(n-1)> accumulator].
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(2 * d2 + 2);
  y.head(d2) = vectorize(model.ground_state().matrix());

  rk4_integrate(grid, y,
                [&](Eigen::VectorXcd& dy, const Eigen::VectorXcd& s, double,
                    double omega) {
                  const auto rho = s.head(d2);
                  const auto sig = s.segment(d2, d2);
                  dy.head(d2).noalias() = gen.static_part * rho;
                  dy.segment(d2, d2).noalias() = gen.static_part * sig;
                  if (omega != 0.0) {
                    dy.head(d2).noalias() += omega * (gen.drive_part * rho);
                    dy.segment(d2, d2).noalias() += omega * (gen.drive_part * sig);
                  }
                  dy.segment(d2, d2).noalias() += jump * rho;
                  dy(2 * d2) = flux_row * rho;
                  dy(2 * d2 + 1) = 2.0 * (flux_row * sig)(0);
                });

  const double trace_drift =
      std::abs(real_probability(vec_trace(y.head(d2), d), "correlator_moments") - 1.0);
  if (trace_drift > 1e-8)
    throw std::runtime_error("correlator_moments: trace drifted beyond 1e-8");
  check_horizon_decay(1.0 - y(0).real(), "correlator_moments");

  FactorialMoments m;
  m.mean = std::max(real_probability(y(2 * d2), "correlator_moments"), 0.0);
  m.second = std::max(real_probability(y(2 * d2 + 1), "correlator_moments"), 0.0);
  return m;
}

double g2_via_correlator(const SystemModel& model, const PulseEnvelope& pulse,
                         int channel, const IntegrationOptions& opts) {
  const FactorialMoments m = correlator_moments(model, pulse, channel, opts);
  if (m.mean < kmean_floor)
    throw std::domain_error("g2_via_correlator: <n> is zero, g2 undefined");
  return m.second / (m.mean * m.mean);
}

std::span<const double> JumpRecords::trajectory(int channel, std::uint64_t i) const {
  if (channel < 0 || channel >= static_cast<int>(offsets.size()))
    throw std::invalid_argument("JumpRecords: channel out of range");
  if (i + 1 >= offsets[channel].size())
    throw std::invalid_argument("JumpRecords: trajectory index out of range");
  const auto b = offsets[channel][i], e = offsets[channel][i + 1];
  return std::span<const double>(times[channel].data() + b, e - b);
}

namespace {

// Uniform in [0, 1) from the top 53 bits; bit-stable across platforms.
double u01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

struct McStep {
  double t_end = 0;
  Eigen::MatrixXcd u;  // no-jump step map for the conditional wavefunction
};

// Step maps of d psi/dt = (-i Omega(t)/2 C - 1/2 sum_k gamma_k |s_k><s_k|) psi,
// one RK4 step each, precomputed once and shared by every trajectory.
std::vector<McStep> build_steps(const SystemModel& model, const TimeGrid& grid) {
  const Eigen::Index d = model.dim();
  Eigen::MatrixXcd damp = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& ch : model.channels()) damp(ch.source, ch.source) += 0.5 * ch.rate;
  const Eigen::MatrixXcd coupling = model.drive_coupling();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);

  const auto gen_at = [&](double omega) -> Eigen::MatrixXcd {
    return complexd(0, -0.5 * omega) * coupling - damp;
  };

  std::vector<McStep> steps;
  steps.reserve(static_cast<std::size_t>(grid.total_steps()));
  for (const TimeSegment& seg : grid.segments()) {
    const double h = seg.dt();
    for (std::int64_t i = 0; i < seg.steps; ++i) {
      const double t = seg.begin + h * static_cast<double>(i);
      const double th = t + 0.5 * h, te = t + h;
      const Eigen::MatrixXcd a1 = gen_at(grid.stage_rate(seg, t));
      const Eigen::MatrixXcd ah = gen_at(grid.stage_rate(seg, th));
      const Eigen::MatrixXcd ae = gen_at(grid.stage_rate(seg, te));
      const Eigen::MatrixXcd k1 = a1;
      const Eigen::MatrixXcd k2 = ah * (id + (0.5 * h) * k1);
      const Eigen::MatrixXcd k3 = ah * (id + (0.5 * h) * k2);
      const Eigen::MatrixXcd k4 = ae * (id + h * k3);
      McStep s;
      s.t_end = te;
      s.u = id + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      steps.push_back(std::move(s));
    }
  }
  return steps;
}

struct BlockResult {
  std::vector<std::uint64_t> hist;                  // [channel * nbuckets + n]
  std::vector<std::vector<double>> rec_times;       // [channel], recorded prefix
  std::vector<std::vector<std::uint32_t>> rec_counts;  // [channel][recorded traj]
};

// Trajectory kernel on fixed-size states; N is the Hilbert dimension.
template <int N>
BlockResult run_block(const SystemModel& model, const std::vector<McStep>& steps,
                      double support_end, std::uint64_t begin, std::uint64_t end,
                      std::uint64_t seed, std::uint64_t record_cap, int nbuckets) {
  using Vec = Eigen::Matrix<complexd, N, 1>;
  using Mat = Eigen::Matrix<complexd, N, N>;

  const int nchannels = static_cast<int>(model.channels().size());
  std::array<double, 4> rate{};  // channel flux rates, indexed by source level
  std::array<int, 4> source{}, target{};
  for (int k = 0; k < nchannels; ++k) {
    rate[k] = model.channels()[k].rate;
    source[k] = model.channels()[k].source;
    target[k] = model.channels()[k].target;
  }

  std::vector<Mat> u(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) u[i] = steps[i].u;

  BlockResult out;
  out.hist.assign(static_cast<std::size_t>(nchannels) * nbuckets, 0);
  out.rec_times.resize(nchannels);
  out.rec_counts.resize(nchannels);

  Vec psi, prop;
  std::array<std::uint32_t, 4> counts{};
  // Recorded per-trajectory jump times; 64 covers every realistic trajectory
  // on the default grid (counts beyond it still land in the histograms).
  std::array<double, 64> jump_times{};
  std::array<int, 64> jump_channel{};

  for (std::uint64_t traj = begin; traj < end; ++traj) {
    std::mt19937_64 rng = make_rng(seed, traj);
    psi.setZero();
    psi(0) = 1.0;
    counts.fill(0);
    int njumps = 0;
    double survival = 1.0;
    double threshold = u01(rng);

    for (std::size_t i = 0; i < steps.size(); ++i) {
      prop.noalias() = u[i] * psi;
      const double q = prop.squaredNorm();
      if (survival * q < threshold) {
        // Jump fired inside this step: pick the channel by its flux.
        double total = 0;
        std::array<double, 4> w{};
        for (int k = 0; k < nchannels; ++k) {
          w[k] = rate[k] * std::norm(psi(source[k]));
          total += w[k];
        }
        if (total <= 0) {  // no emissive amplitude; treat as no-jump
          psi = prop / std::sqrt(q);
          survival *= q;
          continue;
        }
        double r = u01(rng) * total;
        int chosen = 0;
        for (; chosen < nchannels - 1; ++chosen) {
          if (r < w[chosen]) break;
          r -= w[chosen];
        }
        ++counts[chosen];
        if (njumps < static_cast<int>(jump_times.size())) {
          jump_times[njumps] = steps[i].t_end;
          jump_channel[njumps] = chosen;
        }
        ++njumps;
        psi.setZero();
        psi(target[chosen]) = 1.0;
        survival = 1.0;
        threshold = u01(rng);
        // Collapse onto the ground level after the pulse means the story is over.
        if (target[chosen] == 0 && steps[i].t_end >= support_end) break;
      } else {
        survival *= q;
        psi = prop / std::sqrt(q);
        // Dark tail: once the excited amplitude is gone nothing can click.
        if (steps[i].t_end >= support_end && std::norm(psi(0)) >= 1.0 - 1e-12) break;
      }
    }

    for (int k = 0; k < nchannels; ++k) {
      const int bucket = std::min<int>(counts[k], nbuckets - 1);
      ++out.hist[static_cast<std::size_t>(k) * nbuckets + bucket];
    }
    if (traj < record_cap) {
      const int kept = std::min<int>(njumps, static_cast<int>(jump_times.size()));
      for (int k = 0; k < nchannels; ++k) out.rec_counts[k].push_back(0);
      for (int j = 0; j < kept; ++j) {
        out.rec_times[jump_channel[j]].push_back(jump_times[j]);
        ++out.rec_counts[jump_channel[j]].back();
      }
    }
  }
  return out;
}

}  // namespace

McResult mc_trajectories(const SystemModel& model, const PulseEnvelope& pulse,
                         int channel, std::uint64_t n_trajectories,
                         std::uint64_t seed, const IntegrationOptions& opts,
                         const McOptions& mc_opts) {
  check_channel(model, channel);
  if (n_trajectories == 0)
    throw std::invalid_argument("mc_trajectories: need at least one trajectory");
  if (mc_opts.n_max < 1)
    throw std::invalid_argument("mc_trajectories: n_max must be >= 1");
  if (model.dim() != 2 && model.dim() != 3)
    throw std::invalid_argument("mc_trajectories: unsupported dimension");

  const double horizon = decay_horizon(model, pulse, opts);
  const TimeGrid grid = TimeGrid::build(model, pulse, 0.0, horizon, opts);
  const std::vector<McStep> steps = build_steps(model, grid);
  const double support_end = pulse.support_end();
  const int nchannels = static_cast<int>(model.channels().size());
  const int nbuckets = mc_opts.n_max + 2;  // 0..n_max plus an overflow bucket

  const std::uint64_t record_cap = std::min(mc_opts.record_cap, n_trajectories);
  const std::uint64_t block = 8192;
  const std::uint64_t nblocks = (n_trajectories + block - 1) / block;

  int nthreads = mc_opts.threads;
  if (nthreads <= 0) nthreads = std::max(1u, std::thread::hardware_concurrency());
  nthreads = static_cast<int>(std::min<std::uint64_t>(nthreads, nblocks));

  std::vector<BlockResult> results(nblocks);
  std::atomic<std::uint64_t> next{0};
  const auto worker = [&]() {
    for (std::uint64_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) {
      const std::uint64_t begin = b * block;
      const std::uint64_t end = std::min(begin + block, n_trajectories);
      results[b] = model.dim() == 2
                       ? run_block<2>(model, steps, support_end, begin, end, seed,
                                      record_cap, nbuckets)
                       : run_block<3>(model, steps, support_end, begin, end, seed,
                                      record_cap, nbuckets);
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Deterministic merge in block order.
  McResult out;
  out.n_trajectories = n_trajectories;
  std::vector<std::uint64_t> hist(static_cast<std::size_t>(nchannels) * nbuckets, 0);
  out.records.n_trajectories = record_cap;
  out.records.times.resize(nchannels);
  out.records.offsets.assign(nchannels, {0});
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    const BlockResult& r = results[b];
    for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += r.hist[i];
    for (int k = 0; k < nchannels; ++k) {
      auto& off = out.records.offsets[k];
      for (std::uint32_t c : r.rec_counts[k]) off.push_back(off.back() + c);
      out.records.times[k].insert(out.records.times[k].end(), r.rec_times[k].begin(),
                                  r.rec_times[k].end());
    }
  }

  out.channel_counts.resize(nchannels);
  for (int k = 0; k < nchannels; ++k)
    out.channel_counts[k].assign(hist.begin() + static_cast<std::ptrdiff_t>(k) * nbuckets,
                                 hist.begin() + static_cast<std::ptrdiff_t>(k + 1) * nbuckets);

  const double n = static_cast<double>(n_trajectories);
  out.dist.channel = model.channels()[channel].name;
  out.dist.probs.resize(mc_opts.n_max + 1);
  out.std_error.resize(mc_opts.n_max + 1);
  double total = 0;
  for (int m = 0; m <= mc_opts.n_max; ++m) {
    const double p = static_cast<double>(out.channel_counts[channel][m]) / n;
    out.dist.probs[m] = p;
    out.std_error[m] = std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
    total += p;
  }
  out.dist.residual = std::max(1.0 - total, 0.0);
  return out;
}

}  // namespace spsim
