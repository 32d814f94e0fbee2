#include "agnostic/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "agnostic/errors.hpp"
#include "agnostic/parallel.hpp"

namespace agnostic {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(std::string_view text, const std::string& what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("cannot parse " + what + " from '" + std::string(text) + "'");
  }
  return value;
}

double noise_parameter(const std::vector<std::string_view>& parts, std::size_t i, std::string_view text) {
  if (parts.size() <= i) throw ConfigError("noise spec '" + std::string(text) + "' is missing a parameter");
  try {
    return parse_number(parts[i], "noise parameter");
  } catch (const DataError&) {
    throw ConfigError("noise spec '" + std::string(text) + "' has a malformed parameter");
  }
}

// P[|z + t| >= r] for z ~ N(0, 1).
double outside_band_mass(double t, double r) {
  return std_normal_cdf(-r - t) + (1.0 - std_normal_cdf(r - t));
}

// P[|z + t| <= b] for z ~ N(0, 1).
double band_mass(double t, double b) { return std_normal_cdf(b - t) - std_normal_cdf(-b - t); }

void append_direction_grid(int d, int resolution, std::vector<Eigen::VectorXd>& out) {
  if (d == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return;
  }
  if (d == 2) {
    for (int j = 0; j < resolution; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / resolution;
      Eigen::VectorXd w(2);
      w << std::cos(angle), std::sin(angle);
      out.push_back(w);
    }
    return;
  }
  // d == 3: latitude rings with longitude counts proportional to sin(polar).
  const int rings = std::max(1, resolution / 2);
  for (int i = 0; i <= rings; ++i) {
    const double polar = std::numbers::pi * i / rings;
    const int count = std::max(1, static_cast<int>(std::lround(resolution * std::sin(polar))));
    for (int j = 0; j < count; ++j) {
      const double azimuth = 2.0 * std::numbers::pi * j / count;
      Eigen::VectorXd w(3);
      w << std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar);
      out.push_back(w);
    }
  }
}

}  // namespace

NoiseSpec NoiseSpec::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string_view name = parts.front();
  NoiseSpec spec;
  if (name == "clean") {
    spec.model = Model::clean;
  } else if (name == "rcn") {
    spec.model = Model::rcn;
    spec.rate = noise_parameter(parts, 1, text);
  } else if (name == "band_flip" || name == "band") {
    spec.model = Model::band_flip;
    spec.width = noise_parameter(parts, 1, text);
  } else if (name == "far_flip" || name == "far") {
    spec.model = Model::far_flip;
    spec.budget = noise_parameter(parts, 1, text);
    spec.radius = noise_parameter(parts, 2, text);
  } else if (name == "additive_uniform" || name == "additive") {
    spec.model = Model::additive_uniform;
    spec.amplitude = noise_parameter(parts, 1, text);
  } else {
    throw ConfigError("unknown noise model '" + std::string(name) +
                      "' (expected clean|rcn:R|band_flip:B|far_flip:BUDGET:R|additive_uniform:A)");
  }
  return spec;
}

std::string NoiseSpec::to_string() const {
  switch (model) {
    case Model::clean: return "clean";
    case Model::rcn: return "rcn:" + format_double(rate);
    case Model::band_flip: return "band_flip:" + format_double(width);
    case Model::far_flip: return "far_flip:" + format_double(budget) + ":" + format_double(radius);
    case Model::additive_uniform: return "additive_uniform:" + format_double(amplitude);
  }
  return "clean";
}

void validate(const PlantedModel& model) {
  if (model.w_star.size() < 1) throw ConfigError("planted model needs d >= 1");
  if (std::abs(model.w_star.norm() - 1.0) > 1e-9) throw ConfigError("planted w* must be a unit vector");
  if (!std::isfinite(model.t_star)) throw ConfigError("planted bias must be finite");
  const NoiseSpec& noise = model.noise;
  auto in_half = [](double v) { return v >= 0.0 && v <= 0.5; };
  switch (noise.model) {
    case NoiseSpec::Model::clean: break;
    case NoiseSpec::Model::rcn:
      if (!in_half(noise.rate)) throw ConfigError("rcn rate must be in [0, 1/2]");
      break;
    case NoiseSpec::Model::band_flip:
      if (!(noise.width >= 0.0)) throw ConfigError("band_flip width must be >= 0");
      break;
    case NoiseSpec::Model::far_flip:
      if (!in_half(noise.budget)) throw ConfigError("far_flip budget must be in [0, 1/2]");
      if (!(noise.radius >= 0.0)) throw ConfigError("far_flip radius must be >= 0");
      break;
    case NoiseSpec::Model::additive_uniform:
      if (model.kind != LabelMode::relu) throw ConfigError("additive_uniform noise applies to relu models only");
      if (!(noise.amplitude >= 0.0 && noise.amplitude <= 1.0)) {
        throw ConfigError("additive_uniform amplitude must be in [0, 1]");
      }
      break;
  }
  if (model.kind == LabelMode::relu && !(model.scale > 0.0 && std::isfinite(model.scale))) {
    throw ConfigError("relu scale must be > 0");
  }
}

PlantedModel make_planted(LabelMode kind, int d, const NoiseSpec& noise, RngStream& rng, double t_star,
                          double scale) {
  if (d < 1) throw ConfigError("planted model needs d >= 1");
  PlantedModel model;
  model.kind = kind;
  model.w_star.resize(d);
  fill_gaussian(std::span<double>(model.w_star.data(), static_cast<std::size_t>(d)), rng);
  model.w_star /= model.w_star.norm();
  model.t_star = t_star;
  model.scale = scale;
  model.noise = noise;
  validate(model);
  return model;
}

GeneratedBatch generate(const PlantedModel& model, std::size_t n, RngStream& rng) {
  validate(model);
  const int d = model.dimension();
  GeneratedBatch out;
  out.batch.mode = model.kind;
  out.batch.x = sample_gaussian(d, n, rng);
  const std::uint64_t coin_start = rng.position();
  rng.skip(n);

  const NoiseSpec& noise = model.noise;
  const double far_mass = outside_band_mass(model.t_star, noise.radius);
  const double far_prob = far_mass > 0.0 ? std::min(1.0, noise.budget / far_mass) : 0.0;
  const std::span<const double> w(model.w_star.data(), static_cast<std::size_t>(d));

  out.batch.y.resize(static_cast<Eigen::Index>(n));
  std::vector<unsigned char> corrupted(n, 0);
  parallel_for(block_count(n), [&](std::size_t b) {
    const std::size_t lo = b * kSampleBlock;
    const std::size_t hi = std::min(n, lo + kSampleBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const double z = dot(w, out.batch.point(i));
      const double u = rng.uniform_at(coin_start + i);
      double y;
      bool hit = false;
      if (model.kind == LabelMode::halfspace) {
        y = z >= -model.t_star ? 1.0 : -1.0;
        const double shifted = std::abs(z + model.t_star);
        switch (noise.model) {
          case NoiseSpec::Model::rcn: hit = u < noise.rate; break;
          case NoiseSpec::Model::band_flip: hit = shifted <= noise.width; break;
          case NoiseSpec::Model::far_flip: hit = shifted >= noise.radius && u < far_prob; break;
          default: break;
        }
        if (hit) y = -y;
      } else {
        y = model.scale * std::max(0.0, z + model.t_star);
        switch (noise.model) {
          case NoiseSpec::Model::additive_uniform:
            y += (2.0 * u - 1.0) * noise.amplitude;
            hit = noise.amplitude > 0.0;
            break;
          case NoiseSpec::Model::rcn:
            if (u < noise.rate) {
              y = -y;
              hit = true;
            }
            break;
          case NoiseSpec::Model::band_flip:
            if (std::abs(z + model.t_star) <= noise.width) {
              y = -y;
              hit = true;
            }
            break;
          case NoiseSpec::Model::far_flip:
            if (std::abs(z + model.t_star) >= noise.radius && u < far_prob) {
              y = -y;
              hit = true;
            }
            break;
          default: break;
        }
        y = std::clamp(y, -1.0, 1.0);
      }
      out.batch.y[static_cast<Eigen::Index>(i)] = y;
      corrupted[i] = hit ? 1 : 0;
    }
  });
  out.n_corrupted = static_cast<std::size_t>(std::count(corrupted.begin(), corrupted.end(), 1));
  return out;
}

PlantedSource::PlantedSource(PlantedModel model, RngStream rng) : model_(std::move(model)), rng_(rng) {
  validate(model_);
}

SampleBatch PlantedSource::draw(std::size_t n) {
  GeneratedBatch g = generate(model_, n, rng_);
  drawn_ += n;
  corrupted_ += g.n_corrupted;
  return std::move(g.batch);
}

std::size_t PlantedSource::remaining() const { return std::numeric_limits<std::size_t>::max(); }

std::optional<double> planted_error(const PlantedModel& model) {
  if (model.kind != LabelMode::halfspace) return std::nullopt;
  const NoiseSpec& noise = model.noise;
  switch (noise.model) {
    case NoiseSpec::Model::clean: return 0.0;
    case NoiseSpec::Model::rcn: return noise.rate;
    case NoiseSpec::Model::band_flip: return band_mass(model.t_star, noise.width);
    case NoiseSpec::Model::far_flip: return std::min(noise.budget, outside_band_mass(model.t_star, noise.radius));
    case NoiseSpec::Model::additive_uniform: return std::nullopt;
  }
  return std::nullopt;
}

PopulationOpt population_opt(const PlantedModel& model) {
  if (model.kind != LabelMode::halfspace) return {std::nullopt, false, "0-1 OPT is not defined for relu labels"};
  switch (model.noise.model) {
    case NoiseSpec::Model::clean: return {0.0, false, "clean labels"};
    case NoiseSpec::Model::rcn:
      return {model.noise.rate, false, "err(w*) = rate; any h has err = rate + (1 - 2 rate) P[h != f*]"};
    case NoiseSpec::Model::band_flip:
      return {planted_error(model), true, "err(w*) = P[|w*.x + t*| <= width]; upper bound on OPT"};
    default: return {std::nullopt, false, "no closed form"};
  }
}

OracleResult opt_oracle_grid(const SampleBatch& batch, int angular_resolution, std::size_t cap) {
  const int d = batch.dimension();
  if (d < 1 || d > 3) throw UsageError("opt_oracle_grid supports 1 <= d <= 3, got d=" + std::to_string(d));
  if (batch.empty()) throw UsageError("opt_oracle_grid needs a non-empty batch");
  if (angular_resolution < 4) throw ConfigError("angular_resolution must be >= 4");
  const double expected = d == 1 ? 2.0 : d == 2 ? angular_resolution
                                                : 0.5 * angular_resolution * angular_resolution;
  if (expected > static_cast<double>(cap)) {
    throw ResourceError("oracle direction grid of about " + std::to_string(expected) +
                        " directions exceeds the cap " + std::to_string(cap));
  }
  std::vector<Eigen::VectorXd> directions;
  append_direction_grid(d, angular_resolution, directions);

  const std::size_t n = batch.size();
  std::uint64_t positives = 0;
  for (Eigen::Index i = 0; i < batch.y.size(); ++i) positives += batch.y[i] > 0.0 ? 1 : 0;

  struct Best {
    std::uint64_t mistakes;
    double t;
  };
  std::vector<Best> per_dir(directions.size());
  parallel_for(directions.size(), [&](std::size_t k) {
    const Eigen::VectorXd z = margins(directions[k], batch.x);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return z[static_cast<Eigen::Index>(a)] < z[static_cast<Eigen::Index>(b)];
    });
    // Split s: the s smallest margins predicted -1, the rest +1.
    Best best{std::numeric_limits<std::uint64_t>::max(), 0.0};
    std::uint64_t pos_below = 0;
    for (std::size_t s = 1; s < n; ++s) {
      pos_below += batch.y[static_cast<Eigen::Index>(order[s - 1])] > 0.0 ? 1 : 0;
      const double lo = z[static_cast<Eigen::Index>(order[s - 1])];
      const double hi = z[static_cast<Eigen::Index>(order[s])];
      if (!(lo < hi)) continue;
      const std::uint64_t neg_below = s - pos_below;
      const std::uint64_t mistakes = pos_below + ((n - positives) - neg_below);
      if (mistakes < best.mistakes) best = {mistakes, -(0.5 * (lo + hi))};
    }
    per_dir[k] = best;
  });

  OracleResult out;
  out.directions = directions.size();
  out.angular_spacing = d == 1 ? 0.0 : 2.0 * std::numbers::pi / angular_resolution;
  std::uint64_t best_mistakes = n - positives;
  out.best = HalfspaceHypothesis::constant_label(+1, d);
  if (positives < best_mistakes) {
    best_mistakes = positives;
    out.best = HalfspaceHypothesis::constant_label(-1, d);
  }
  for (std::size_t k = 0; k < directions.size(); ++k) {
    if (per_dir[k].mistakes < best_mistakes) {
      best_mistakes = per_dir[k].mistakes;
      out.best = HalfspaceHypothesis{directions[k], per_dir[k].t, 0};
    }
  }
  out.empirical_opt = static_cast<double>(best_mistakes) / static_cast<double>(n);
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::logic_error("to_chars failed");
  return std::string(buf, ptr);
}

void write_csv(const SampleBatch& batch, std::ostream& out) {
  const int d = batch.dimension();
  out << "d," << d << ",n," << batch.size() << ",mode," << to_string(batch.mode) << '\n';
  std::string line;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    line.clear();
    for (int j = 0; j < d; ++j) {
      line += format_double(batch.x(static_cast<Eigen::Index>(i), j));
      line += ',';
    }
    line += format_double(batch.y[static_cast<Eigen::Index>(i)]);
    line += '\n';
    out << line;
  }
  if (!out) throw DataError("failed to write dataset CSV");
}

SampleBatch read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("dataset CSV is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto fields = split(header, ',');
  if (fields.size() != 6 || fields[0] != "d" || fields[2] != "n" || fields[4] != "mode") {
    throw DataError("dataset CSV header must be 'd,<d>,n,<n>,mode,<halfspace|relu>', got '" + header + "'");
  }
  const double d_value = parse_number(fields[1], "dimension");
  const double n_value = parse_number(fields[3], "row count");
  if (d_value < 1 || d_value != std::floor(d_value) || n_value < 0 || n_value != std::floor(n_value)) {
    throw DataError("dataset CSV header has invalid d or n");
  }
  const auto d = static_cast<int>(d_value);
  const auto n = static_cast<std::size_t>(n_value);

  SampleBatch batch;
  try {
    batch.mode = parse_label_mode(fields[5]);
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  batch.x.resize(static_cast<Eigen::Index>(n), d);
  batch.y.resize(static_cast<Eigen::Index>(n));
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw DataError("dataset CSV declares " + std::to_string(n) + " rows but has " + std::to_string(i));
    }
    const auto cells = split(line, ',');
    if (cells.size() != static_cast<std::size_t>(d) + 1) {
      throw DataError("dataset CSV row " + std::to_string(i + 2) + " has " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(d + 1));
    }
    const std::string where = "row " + std::to_string(i + 2);
    for (int j = 0; j < d; ++j) {
      batch.x(static_cast<Eigen::Index>(i), j) = parse_number(cells[static_cast<std::size_t>(j)], where);
    }
    batch.y[static_cast<Eigen::Index>(i)] = parse_number(cells.back(), where);
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") throw DataError("dataset CSV has more rows than declared");
  }
  validate(batch);
  return batch;
}

void write_csv_file(const SampleBatch& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  write_csv(batch, out);
}

SampleBatch read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset '" + path + "'");
  return read_csv(in);
}

}  // namespace agnostic
