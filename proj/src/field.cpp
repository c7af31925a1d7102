#include "dasgp/field.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string_view>

#include "dasgp/error.hpp"

namespace dasgp {

namespace {

struct Bump {
  double cx, cy;
  double a11, a12, a21, a22;
};

// Matrices used verbatim; only their symmetric parts affect the form.
constexpr Bump kBumps[3] = {
    {0.1, 0.9, 4.0, -6.0, -1.0, 6.0},
    {0.5, 0.6, 8.0, 1.0, 5.0, 4.0},
    {0.9, 0.7, 8.0, -4.1, -4.1, 20.0},
};

void addNoise(SensorField& field, Rng& rng) {
  std::normal_distribution<double> noise(0.0, std::sqrt(field.noiseVariance));
  field.measurements.resize(field.size());
  for (std::size_t l = 0; l < field.size(); ++l) {
    field.measurements[l] = field.trueMeans[l] + noise(rng);
  }
}

void requireGenerator(std::size_t sensorCount, double noiseVariance) {
  if (sensorCount == 0) fail(ErrorCode::InvalidArgument, "sensor count must be >= 1");
  if (!(noiseVariance > 0.0) || !std::isfinite(noiseVariance)) {
    fail(ErrorCode::InvalidArgument, "noise variance must be positive");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parseNumber(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string_view> splitCells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

double smoothField1D(double x) {
  const double s = std::sin(x / 3.0);
  return s * s - std::cos(x / 2.0) / 5.0;
}

double bumpField2D(double x1, double x2) {
  double sum = 0.0;
  for (const auto& b : kBumps) {
    const double dx = x1 - b.cx;
    const double dy = x2 - b.cy;
    const double form = dx * (b.a11 * dx + b.a12 * dy) + dy * (b.a21 * dx + b.a22 * dy);
    sum += std::exp(-form);
  }
  return sum / 3.0;
}

RandomSinusoid RandomSinusoid::draw(std::size_t terms, Rng& rng) {
  if (terms == 0) fail(ErrorCode::InvalidArgument, "random sinusoid needs T >= 1");
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> freq(0.0, 0.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  RandomSinusoid s;
  for (std::size_t i = 0; i < terms; ++i) {
    s.amplitudes.push_back(amp(rng));
    s.frequencies.push_back(freq(rng));
    s.phases.push_back(phase(rng));
  }
  return s;
}

double RandomSinusoid::operator()(double x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    sum += amplitudes[i] * std::sin(2.0 * std::numbers::pi * frequencies[i] * x + phases[i]);
  }
  return std::sqrt(2.0 / static_cast<double>(amplitudes.size())) * sum;
}

SensorField gen1D(std::size_t sensorCount, double noiseVariance, Rng& rng) {
  requireGenerator(sensorCount, noiseVariance);
  SensorField f;
  f.noiseVariance = noiseVariance;
  std::uniform_real_distribution<double> pos(0.0, 10.0);
  for (std::size_t l = 0; l < sensorCount; ++l) {
    const double x = pos(rng);
    f.locations.push_back({x});
    f.trueMeans.push_back(smoothField1D(x));
  }
  addNoise(f, rng);
  return f;
}

SensorField gen2D(std::size_t sensorCount, double noiseVariance, Rng& rng) {
  requireGenerator(sensorCount, noiseVariance);
  SensorField f;
  f.noiseVariance = noiseVariance;
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  for (std::size_t l = 0; l < sensorCount; ++l) {
    const double x1 = pos(rng);
    const double x2 = pos(rng);
    f.locations.push_back({x1, x2});
    f.trueMeans.push_back(bumpField2D(x1, x2));
  }
  addNoise(f, rng);
  return f;
}

SensorField genRandomSinusoid(std::size_t sensorCount, std::size_t terms, double noiseVariance,
                              Rng& rng) {
  requireGenerator(sensorCount, noiseVariance);
  const auto model = RandomSinusoid::draw(terms, rng);
  SensorField f;
  f.noiseVariance = noiseVariance;
  std::uniform_real_distribution<double> pos(0.0, 10.0);
  for (std::size_t l = 0; l < sensorCount; ++l) {
    const double x = pos(rng);
    f.locations.push_back({x});
    f.trueMeans.push_back(model(x));
  }
  addNoise(f, rng);
  return f;
}

CsvLoadResult loadCsv(const std::filesystem::path& path, double noiseVariance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  if (!(noiseVariance > 0.0)) fail(ErrorCode::InvalidArgument, "noise variance must be positive");

  CsvLoadResult out;
  out.field.noiseVariance = noiseVariance;
  std::size_t columns = 0;
  std::size_t lineNo = 0;
  std::string line;
  std::map<std::vector<double>, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string_view view = trim(line);
    if (lineNo == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;

    const auto cells = splitCells(view);
    std::vector<double> nums;
    bool numeric = true;
    for (auto cell : cells) {
      const auto v = parseNumber(cell);
      if (!v) {
        numeric = false;
        break;
      }
      nums.push_back(*v);
    }
    if (!numeric) {
      if (out.field.locations.empty() && columns == 0) {
        columns = cells.size();  // header row
        if (columns != 2 && columns != 3) {
          fail(ErrorCode::Parse, path.string() + ": line " + std::to_string(lineNo) +
                                     ": expected 2 or 3 columns");
        }
        continue;
      }
      fail(ErrorCode::Parse,
           path.string() + ": line " + std::to_string(lineNo) + ": non-numeric cell");
    }
    if (columns == 0) columns = nums.size();
    if (nums.size() != columns || (columns != 2 && columns != 3)) {
      fail(ErrorCode::Parse, path.string() + ": line " + std::to_string(lineNo) + ": expected " +
                                 (columns == 2 || columns == 3 ? std::to_string(columns)
                                                               : std::string("2 or 3")) +
                                 " columns, found " + std::to_string(nums.size()));
    }
    const double y = nums.back();
    nums.pop_back();
    if (auto [it, fresh] = seen.emplace(nums, lineNo); !fresh) {
      out.warnings.push_back("line " + std::to_string(lineNo) +
                             " duplicates the location on line " + std::to_string(it->second));
    }
    out.field.locations.emplace_back(nums);
    out.field.trueMeans.push_back(y);
    out.field.measurements.push_back(y);
  }
  if (out.field.locations.empty()) {
    fail(ErrorCode::Parse, path.string() + ": no data rows");
  }
  return out;
}

}  // namespace dasgp
