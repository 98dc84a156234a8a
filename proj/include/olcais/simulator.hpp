#pragma once

// Synthetic object stream: coloured 16x16 images, disruptor transforms,
// colour-histogram adapter and the one-instance-at-a-time data feeder.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "olcais/types.hpp"

namespace olcais::sim {

inline constexpr std::size_t kImageSide = 16;
inline constexpr std::size_t kPixelCount = kImageSide * kImageSide;
inline constexpr std::size_t kBinsPerChannel = 8;
inline constexpr std::size_t kFeatureDim = 3 * kBinsPerChannel;

using Rgb = std::array<std::uint8_t, 3>;

struct SyntheticImage {
  std::array<Rgb, kPixelCount> pixels{};
  ColorClass true_class = ColorClass::Red;

  std::uint64_t channel_total(std::size_t channel) const {
    std::uint64_t total = 0;
    for (const auto& px : pixels) total += px[channel];
    return total;
  }

  friend bool operator==(const SyntheticImage&, const SyntheticImage&) = default;
};

struct FeatureInstance {
  std::vector<double> features;  // kFeatureDim entries, three 8-bin blocks
  ColorClass true_class = ColorClass::Red;
  FeedMode mode = FeedMode::Normal;
};

/// Intensity model of the generator. The dominant channel is clamped to
/// [dominant_floor, 255] and the others to [0, other_ceiling], which is what
/// guarantees the mean-intensity contract of generate_object.
struct GeneratorParams {
  double dominant_mean = 200.0;
  double dominant_sd = 25.0;
  double other_mean = 40.0;
  double other_sd = 15.0;
  int dominant_floor = 160;
  int other_ceiling = 80;
};

inline SyntheticImage generate_object(ColorClass cls, std::mt19937_64& rng,
                                      const GeneratorParams& params = {}) {
  std::normal_distribution<double> dominant(params.dominant_mean, params.dominant_sd);
  std::normal_distribution<double> other(params.other_mean, params.other_sd);
  const std::size_t hot = index_of(cls);

  SyntheticImage img;
  img.true_class = cls;
  for (auto& px : img.pixels) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      double v = 0.0;
      int lo = 0;
      int hi = 255;
      if (ch == hot) {
        v = dominant(rng);
        lo = params.dominant_floor;
      } else {
        v = other(rng);
        hi = params.other_ceiling;
      }
      px[ch] = static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(v)), lo, hi));
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Disruptors

struct Darkness {
  double factor = 0.2;
  friend bool operator==(const Darkness&, const Darkness&) = default;
};

struct HistogramEqualization {
  friend bool operator==(const HistogramEqualization&, const HistogramEqualization&) = default;
};

using Disruptor = std::variant<Darkness, HistogramEqualization>;

inline std::string disruptor_name(const Disruptor& d) {
  return std::holds_alternative<Darkness>(d) ? "darkness" : "histogram_equalization";
}

namespace detail {

inline SyntheticImage darken(const SyntheticImage& img, double factor) {
  SyntheticImage out = img;
  for (auto& px : out.pixels)
    for (auto& v : px) v = static_cast<std::uint8_t>(std::floor(v * factor));
  return out;
}

inline SyntheticImage equalize(const SyntheticImage& img) {
  SyntheticImage out = img;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    std::array<std::size_t, 256> hist{};
    for (const auto& px : img.pixels) ++hist[px[ch]];
    std::array<std::size_t, 256> cdf{};
    std::size_t running = 0;
    for (std::size_t v = 0; v < 256; ++v) cdf[v] = running += hist[v];
    const auto first = std::find_if(hist.begin(), hist.end(), [](auto n) { return n != 0; });
    const std::size_t cdf_min = cdf[static_cast<std::size_t>(first - hist.begin())];
    if (cdf_min == kPixelCount) continue;  // constant channel: nothing to spread
    const double scale = 255.0 / static_cast<double>(kPixelCount - cdf_min);
    for (auto& px : out.pixels) {
      const double mapped = static_cast<double>(cdf[px[ch]] - cdf_min) * scale;
      px[ch] = static_cast<std::uint8_t>(std::lround(mapped));
    }
  }
  return out;
}

}  // namespace detail

inline SyntheticImage apply_disruptor(const SyntheticImage& img, const Disruptor& d) {
  return std::visit(
      [&](const auto& dis) -> SyntheticImage {
        using T = std::decay_t<decltype(dis)>;
        if constexpr (std::is_same_v<T, Darkness>)
          return detail::darken(img, dis.factor);
        else
          return detail::equalize(img);
      },
      d);
}

/// Name-keyed disruptor factories; `param` is the darkness factor and is
/// ignored by parameterless disruptors.
inline const std::map<std::string, std::function<Disruptor(double)>, std::less<>>&
disruptor_registry() {
  static const std::map<std::string, std::function<Disruptor(double)>, std::less<>> registry{
      {"darkness",
       [](double factor) -> Disruptor {
         if (!(factor > 0.0 && factor <= 1.0))
           throw DomainError("darkness factor must lie in (0, 1]");
         return Darkness{factor};
       }},
      {"histogram_equalization", [](double) -> Disruptor { return HistogramEqualization{}; }},
  };
  return registry;
}

inline Disruptor make_disruptor(std::string_view name, double param = 0.2) {
  const auto& reg = disruptor_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw DomainError("unknown disruptor: " + std::string(name));
  return it->second(param);
}

// ---------------------------------------------------------------------------
// Adapter

inline FeatureInstance extract_histogram(const SyntheticImage& img,
                                         FeedMode mode = FeedMode::Normal) {
  FeatureInstance inst;
  inst.features.assign(kFeatureDim, 0.0);
  inst.true_class = img.true_class;
  inst.mode = mode;
  std::array<std::array<std::size_t, kBinsPerChannel>, 3> counts{};
  for (const auto& px : img.pixels)
    for (std::size_t ch = 0; ch < 3; ++ch) ++counts[ch][px[ch] / (256 / kBinsPerChannel)];
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t b = 0; b < kBinsPerChannel; ++b)
      inst.features[ch * kBinsPerChannel + b] =
          static_cast<double>(counts[ch][b]) / static_cast<double>(kPixelCount);
  return inst;
}

// ---------------------------------------------------------------------------
// Feeder

enum class ClassOrder { RoundRobin, Shuffle };

/// A disruption window [start, end). An open end means "until fixed".
struct DisruptionWindow {
  std::size_t start = 0;
  std::optional<std::size_t> end;
  Disruptor disruptor = Darkness{};
};

struct FeedSchedule {
  std::size_t steady_len = 30;
  std::size_t disrupt_start = 30;
  std::optional<std::size_t> fix_at;  // nullopt: decided at run time by the protocol
  Disruptor disruptor = Darkness{};
  std::size_t cycles = 1;

  void validate() const {
    if (disrupt_start < steady_len) throw DomainError("disrupt_start must be >= steady_len");
    if (cycles < 1) throw DomainError("cycles must be >= 1");
    if (fix_at && *fix_at <= disrupt_start) throw DomainError("fix_at must follow disrupt_start");
    if (const auto* d = std::get_if<Darkness>(&disruptor); d && !(d->factor > 0.0 && d->factor <= 1.0))
      throw DomainError("darkness factor must lie in (0, 1]");
  }

  /// Static windows. Only defined when fix_at is known; cycle k repeats the
  /// first window shifted by k * (fix_at + steady_len).
  std::vector<DisruptionWindow> windows() const {
    std::vector<DisruptionWindow> out;
    if (!fix_at) {
      out.push_back({disrupt_start, std::nullopt, disruptor});
      return out;
    }
    const std::size_t period = *fix_at + steady_len;
    for (std::size_t k = 0; k < cycles; ++k)
      out.push_back({disrupt_start + k * period, *fix_at + k * period, disruptor});
    return out;
  }
};

/// Streams one instance per iteration. Disruption can come from planned
/// windows or be toggled at iteration boundaries with inject()/fix().
class Feeder {
 public:
  Feeder(std::uint64_t seed, std::vector<DisruptionWindow> planned = {},
         ClassOrder order = ClassOrder::RoundRobin, GeneratorParams params = {},
         std::optional<std::size_t> budget = std::nullopt)
      : rng_(seed), planned_(std::move(planned)), order_(order), params_(params), budget_(budget) {}

  std::size_t iteration() const { return iteration_; }
  bool disrupted() const { return active_.has_value(); }
  const std::optional<Disruptor>& active_disruptor() const { return active_; }

  void inject(Disruptor d) { active_ = std::move(d); }
  void fix() { active_.reset(); }

  /// Produces the instance for the current iteration and advances by one.
  /// Returns nullopt once a configured budget is consumed.
  std::optional<FeatureInstance> next_instance() {
    if (budget_ && iteration_ >= *budget_) return std::nullopt;
    for (const auto& w : planned_) {
      if (w.start == iteration_) active_ = w.disruptor;
      if (w.end && *w.end == iteration_) active_.reset();
    }
    const ColorClass cls = next_class();
    SyntheticImage img = generate_object(cls, rng_, params_);
    FeedMode mode = FeedMode::Normal;
    if (active_) {
      img = apply_disruptor(img, *active_);
      mode = FeedMode::Disrupted;
    }
    last_image_ = img;
    ++iteration_;
    return extract_histogram(img, mode);
  }

  const SyntheticImage& last_image() const { return last_image_; }

 private:
  ColorClass next_class() {
    if (order_ == ClassOrder::RoundRobin)
      return static_cast<ColorClass>(iteration_ % kNumColorClasses);
    if (round_pos_ == round_.size()) {
      round_ = {ColorClass::Red, ColorClass::Green, ColorClass::Blue};
      std::shuffle(round_.begin(), round_.end(), rng_);
      round_pos_ = 0;
    }
    return round_[round_pos_++];
  }

  std::mt19937_64 rng_;
  std::vector<DisruptionWindow> planned_;
  ClassOrder order_;
  GeneratorParams params_;
  std::optional<std::size_t> budget_;
  std::optional<Disruptor> active_;
  std::size_t iteration_ = 0;
  std::vector<ColorClass> round_;
  std::size_t round_pos_ = 0;
  SyntheticImage last_image_;
};

/// Writes a binary PPM (P6) image.
inline void write_ppm(const SyntheticImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "P6\n" << kImageSide << ' ' << kImageSide << "\n255\n";
  for (const auto& px : img.pixels) out.write(reinterpret_cast<const char*>(px.data()), 3);
}

/// Dumps `count` instances of a feeder as PPM files plus manifest.csv
/// (iteration,class,mode).
inline void export_dataset(Feeder& feeder, std::size_t count, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw std::runtime_error("cannot open " + (dir / "manifest.csv").string());
  manifest << "iteration,class,mode\n";
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t it = feeder.iteration();
    auto inst = feeder.next_instance();
    if (!inst) break;
    write_ppm(feeder.last_image(), dir / ("instance_" + std::to_string(it) + ".ppm"));
    manifest << it << ',' << to_string(inst->true_class) << ',' << to_string(inst->mode) << '\n';
  }
}

}  // namespace olcais::sim
