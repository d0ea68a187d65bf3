#include "spsim/sweep.hpp"

#include "spsim/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace spsim {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

SystemModel make_model(const SweepConfig& config) {
  if (config.system == "2ls") return SystemModel::two_level(1.0);
  return SystemModel::standard_cascade(1.0);
}

PulseEnvelope make_pulse(const SweepConfig& config, double gamma_t) {
  return config.shape == "square" ? PulseEnvelope::square(config.area, gamma_t)
                                  : PulseEnvelope::gaussian(config.area, gamma_t);
}

[[noreturn]] void point_fail(int index, double gamma_t, const std::string& what) {
  std::ostringstream msg;
  msg << "sweep point " << index << " (gamma_T = " << gamma_t << "): " << what;
  throw std::runtime_error(msg.str());
}

}  // namespace

void SweepConfig::validate() const {
  if (system != "2ls" && system != "3ls")
    throw std::invalid_argument("system must be '2ls' or '3ls'");
  if (shape != "square" && shape != "gaussian")
    throw std::invalid_argument("shape must be 'square' or 'gaussian'");
  if (format != "csv" && format != "json")
    throw std::invalid_argument("format must be 'csv' or 'json'");
  if (!(area > 0) || !std::isfinite(area))
    throw std::invalid_argument("area must be positive and finite");
  if (!(grid_min > 0) || !std::isfinite(grid_max))
    throw std::invalid_argument("grid bounds must be positive and finite");
  if (grid_max < grid_min)
    throw std::invalid_argument("grid_max must be >= grid_min");
  if (grid_points < 1) throw std::invalid_argument("grid_points must be >= 1");
  if (grid_points > 1 && grid_max == grid_min)
    throw std::invalid_argument("grid_max must exceed grid_min for multi-point grids");
  if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
  if (dt < 0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be nonnegative");
  if (horizon < 15.0)
    throw std::invalid_argument("horizon must be >= 15 (units of 1/gamma_min)");
  if (mc && n_traj == 0) throw std::invalid_argument("n_traj must be >= 1");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

std::vector<double> SweepConfig::grid() const {
  std::vector<double> points(static_cast<std::size_t>(grid_points));
  if (grid_points == 1) {
    points[0] = grid_min;
    return points;
  }
  const double lmin = std::log(grid_min), lmax = std::log(grid_max);
  for (int i = 0; i < grid_points; ++i)
    points[static_cast<std::size_t>(i)] =
        std::exp(lmin + (lmax - lmin) * static_cast<double>(i) /
                            static_cast<double>(grid_points - 1));
  points.front() = grid_min;
  points.back() = grid_max;
  return points;
}

namespace {

void apply_key(SweepConfig& config, const std::string& key, const std::string& value,
               const std::string& name, std::size_t lineno) {
  const auto fail = [&](const std::string& what) -> void {
    std::ostringstream msg;
    msg << name << ":" << lineno << ": " << what;
    throw std::runtime_error(msg.str());
  };
  const auto as_double = [&]() {
    try {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail("expected a number for '" + key + "', got '" + value + "'");
    }
    return 0.0;
  };
  const auto as_u64 = [&]() {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      fail("expected a nonnegative integer for '" + key + "', got '" + value + "'");
    }
    return std::uint64_t{0};
  };
  const auto as_bool = [&]() {
    if (value == "1" || value == "true" || value == "on") return true;
    if (value == "0" || value == "false" || value == "off") return false;
    fail("expected a boolean for '" + key + "', got '" + value + "'");
    return false;
  };

  if (key == "system") config.system = value;
  else if (key == "channel") config.channel = value;
  else if (key == "shape") config.shape = value;
  else if (key == "area") config.area = as_double();
  else if (key == "grid_min") config.grid_min = as_double();
  else if (key == "grid_max") config.grid_max = as_double();
  else if (key == "grid_points") config.grid_points = static_cast<int>(as_u64());
  else if (key == "grid") {
    double mn = 0, mx = 0;
    int np = 0;
    if (std::sscanf(value.c_str(), "%lf:%lf:%d", &mn, &mx, &np) != 3)
      fail("expected 'min:max:points' for 'grid', got '" + value + "'");
    config.grid_min = mn;
    config.grid_max = mx;
    config.grid_points = np;
  }
  else if (key == "n_max" || key == "nmax") config.n_max = static_cast<int>(as_u64());
  else if (key == "dt") config.dt = as_double();
  else if (key == "horizon") config.horizon = as_double();
  else if (key == "mc") config.mc = as_bool();
  else if (key == "n_traj" || key == "ntraj") config.n_traj = as_u64();
  else if (key == "seed") config.seed = as_u64();
  else if (key == "threads") config.threads = static_cast<int>(as_u64());
  else if (key == "out") config.out = value;
  else if (key == "format") config.format = value;
  else if (key == "svg") config.svg = value;
  else fail("unknown key '" + key + "'");
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SweepConfig load_sweep_config(std::istream& in, const std::string& name) {
  SweepConfig config;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = strip(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << name << ":" << lineno << ": expected 'key = value', got '" << line << "'";
      throw std::runtime_error(msg.str());
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream msg;
      msg << name << ":" << lineno << ": empty key or value";
      throw std::runtime_error(msg.str());
    }
    apply_key(config, key, value, name, lineno);
  }
  return config;
}

SweepConfig load_sweep_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return load_sweep_config(in, path);
}

namespace {

SweepRow compute_row(const SweepConfig& config, const SystemModel& model,
                     int channel, int index, double gamma_t, int mc_threads) {
  const PulseEnvelope pulse = make_pulse(config, gamma_t);
  const IntegrationOptions opts{config.dt, config.horizon};

  SweepRow row;
  row.gamma_t = gamma_t;
  try {
    const PhotocountDistribution dist =
        photocount_distribution(model, pulse, channel, config.n_max, opts);
    row.probs = dist.probs;
    row.residual = dist.residual;
    row.g2_moments = g2_from_counts(dist);

    const FactorialMoments moments = correlator_moments(model, pulse, channel, opts);
    row.mean_n = moments.mean;
    if (moments.mean < 1e-30) throw std::domain_error("<n> is zero, g2 undefined");
    row.g2_correlator = moments.second / (moments.mean * moments.mean);

    // Counting invariants are asserted here, not assumed.
    double total = row.residual;
    for (double p : row.probs) total += p;
    if (std::abs(total - 1.0) > 1e-9)
      throw std::runtime_error("photocount normalization violated");
    const double rel =
        std::abs(row.g2_moments - row.g2_correlator) / std::max(row.g2_correlator, 1e-300);
    if (rel > 1e-3)
      throw std::runtime_error("moment-route and correlator-route g2 disagree");
    if (model.kind() == SystemKind::ThreeLevelCascade) {
      const int other = channel == 0 ? 1 : 0;
      const FactorialMoments cross = correlator_moments(model, pulse, other, opts);
      if (std::abs(cross.mean - moments.mean) > 1e-6)
        throw std::runtime_error("cascade channel means disagree");
    }

    if (model.kind() == SystemKind::TwoLevel) {
      const double gamma = model.channels()[0].rate;
      row.analytic_p2 = p2_short_two_level(gamma, gamma_t);
      row.analytic_g2 = g2_short_two_level(gamma, gamma_t);
    } else {
      const double gx = model.channels()[model.channel_index("X")].rate;
      const double g2x = model.channels()[model.channel_index("2X")].rate;
      row.analytic_p2 = p2_short_cascade(gx, g2x, gamma_t);
      row.analytic_g2 = g2_short_cascade(gx, g2x, gamma_t);
    }

    if (config.mc) {
      McOptions mc_opts;
      mc_opts.threads = mc_threads;
      mc_opts.record_cap = 0;  // sweeps keep only the histograms
      const McResult mc = mc_trajectories(model, pulse, channel, config.n_traj,
                                          derive_seed(config.seed, index), opts, mc_opts);
      row.mc_probs.assign(mc.dist.probs.begin(), mc.dist.probs.begin() + 3);
      row.mc_err.assign(mc.std_error.begin(), mc.std_error.begin() + 3);
    }
  } catch (const std::exception& e) {
    point_fail(index, gamma_t, e.what());
  }
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  const SystemModel model = make_model(config);
  const int channel = model.channel_index(config.channel);
  const std::vector<double> points = config.grid();

  SweepResult result;
  result.config = config;
  result.channel_name = model.channels()[channel].name;
  result.rows.resize(points.size());

  int pool = config.threads > 0
                 ? config.threads
                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  pool = static_cast<int>(std::min<std::size_t>(pool, points.size()));

  if (config.mc || pool == 1) {
    // Monte-Carlo points parallelize internally; plain points run in order.
    for (std::size_t i = 0; i < points.size(); ++i)
      result.rows[i] = compute_row(config, model, channel, static_cast<int>(i),
                                   points[i], config.threads);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(pool));
    for (int w = 0; w < pool; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (std::size_t i = next.fetch_add(1); i < points.size();
               i = next.fetch_add(1))
            result.rows[i] = compute_row(config, model, channel,
                                         static_cast<int>(i), points[i], 1);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : workers) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const SweepConfig& c = result.config;
  out << "# spsim sweep 1\n";
  out << "# system=" << c.system << " channel=" << result.channel_name
      << " shape=" << c.shape << " area=" << fmt(c.area) << "\n";
  out << "# grid_min=" << fmt(c.grid_min) << " grid_max=" << fmt(c.grid_max)
      << " grid_points=" << c.grid_points << "\n";
  out << "# n_max=" << c.n_max << " dt=" << fmt(c.dt) << " horizon=" << fmt(c.horizon)
      << "\n";
  if (c.mc)
    out << "# mc=1 n_traj=" << c.n_traj << " seed=" << c.seed << "\n";
  else
    out << "# mc=0\n";

  out << "gamma_T,g2_moments,g2_correlator,mean_n";
  for (int n = 0; n <= c.n_max; ++n) out << ",P" << n;
  out << ",residual,analytic_P2,analytic_g2";
  if (c.mc)
    out << ",mc_P0,mc_P0_err,mc_P1,mc_P1_err,mc_P2,mc_P2_err";
  out << "\n";

  for (const SweepRow& row : result.rows) {
    out << fmt(row.gamma_t) << "," << fmt(row.g2_moments) << ","
        << fmt(row.g2_correlator) << "," << fmt(row.mean_n);
    for (double p : row.probs) out << "," << fmt(p);
    out << "," << fmt(row.residual) << "," << fmt(row.analytic_p2) << ","
        << fmt(row.analytic_g2);
    if (c.mc)
      for (std::size_t i = 0; i < row.mc_probs.size(); ++i)
        out << "," << fmt(row.mc_probs[i]) << "," << fmt(row.mc_err[i]);
    out << "\n";
  }
}

void write_sweep_json(std::ostream& out, const SweepResult& result) {
  const SweepConfig& c = result.config;
  nlohmann::ordered_json doc;
  doc["format"] = "spsim sweep 1";
  nlohmann::ordered_json cfg;
  cfg["system"] = c.system;
  cfg["channel"] = result.channel_name;
  cfg["shape"] = c.shape;
  cfg["area"] = c.area;
  cfg["grid_min"] = c.grid_min;
  cfg["grid_max"] = c.grid_max;
  cfg["grid_points"] = c.grid_points;
  cfg["n_max"] = c.n_max;
  cfg["dt"] = c.dt;
  cfg["horizon"] = c.horizon;
  cfg["mc"] = c.mc;
  if (c.mc) {
    cfg["n_traj"] = c.n_traj;
    cfg["seed"] = c.seed;
  }
  doc["config"] = cfg;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SweepRow& row : result.rows) {
    nlohmann::ordered_json r;
    r["gamma_T"] = row.gamma_t;
    r["g2_moments"] = row.g2_moments;
    r["g2_correlator"] = row.g2_correlator;
    r["mean_n"] = row.mean_n;
    r["P"] = row.probs;
    r["residual"] = row.residual;
    r["analytic_P2"] = row.analytic_p2;
    r["analytic_g2"] = row.analytic_g2;
    if (c.mc) {
      r["mc_P"] = row.mc_probs;
      r["mc_P_err"] = row.mc_err;
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << "\n";
}

void write_sweep_svg(std::ostream& out, const SweepResult& result) {
  // Minimal log-log plot: simulated g2 (solid) and the short-pulse law (dashed).
  const double width = 640, height = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const SweepRow& row : result.rows) {
    for (double v : {row.g2_moments, row.analytic_g2}) {
      if (v > 0) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
    xmin = std::min(xmin, row.gamma_t);
    xmax = std::max(xmax, row.gamma_t);
  }
  if (!(xmax > xmin) || !(ymax > ymin)) {
    xmin = 1e-3; xmax = 10; ymin = 1e-8; ymax = 1;
  }
  const auto xpix = [&](double v) {
    return ml + (std::log10(v) - std::log10(xmin)) /
                    (std::log10(xmax) - std::log10(xmin)) * (width - ml - mr);
  };
  const auto ypix = [&](double v) {
    return height - mb - (std::log10(v) - std::log10(ymin)) /
                             (std::log10(ymax) - std::log10(ymin)) *
                             (height - mt - mb);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
      << "\" height=\"" << height - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  const auto polyline = [&](const char* color, const char* dash, auto getter) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-dasharray=\""
        << dash << "\" points=\"";
    for (const SweepRow& row : result.rows) {
      const double v = getter(row);
      if (v > 0) out << xpix(row.gamma_t) << "," << ypix(v) << " ";
    }
    out << "\"/>\n";
  };
  polyline("#c0392b", "", [](const SweepRow& r) { return r.g2_moments; });
  polyline("#2c3e50", "6,4", [](const SweepRow& r) { return r.analytic_g2; });
  out << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"14\">gamma*T</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + (height - mt - mb) / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
      << (mt + (height - mt - mb) / 2) << ")\">g2[0]</text>\n";
  out << "</svg>\n";
}

void write_sweep(const SweepResult& result) {
  const SweepConfig& c = result.config;
  const auto dump = [&](std::ostream& out) {
    if (c.format == "csv")
      write_sweep_csv(out, result);
    else
      write_sweep_json(out, result);
  };
  if (c.out == "-") {
    dump(std::cout);
  } else {
    std::ofstream out(c.out);
    if (!out) throw std::runtime_error("cannot open '" + c.out + "' for writing");
    dump(out);
    if (!out.good()) throw std::runtime_error("failed writing '" + c.out + "'");
  }
  if (!c.svg.empty()) {
    std::ofstream out(c.svg);
    if (!out) throw std::runtime_error("cannot open '" + c.svg + "' for writing");
    write_sweep_svg(out, result);
    if (!out.good()) throw std::runtime_error("failed writing '" + c.svg + "'");
  }
}

}  // namespace spsim
