#pragma once

// Synthetic sensor fields and CSV ingestion.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dasgp/das.hpp"
#include "dasgp/random.hpp"

namespace dasgp {

/// sin^2(x/3) - cos(x/2)/5 on [0, 10].
double smoothField1D(double x);

/// Mean of three anisotropic Gaussian bumps on [0, 1]^2.
double bumpField2D(double x1, double x2);

/// One draw of the random sinusoid model: sqrt(2/T) sum_i X_i sin(2 pi f_i x + theta_i).
struct RandomSinusoid {
  std::vector<double> amplitudes;
  std::vector<double> frequencies;
  std::vector<double> phases;

  static RandomSinusoid draw(std::size_t terms, Rng& rng);
  double operator()(double x) const;
};

SensorField gen1D(std::size_t sensorCount, double noiseVariance, Rng& rng);
SensorField gen2D(std::size_t sensorCount, double noiseVariance, Rng& rng);
SensorField genRandomSinusoid(std::size_t sensorCount, std::size_t terms,
                              double noiseVariance, Rng& rng);

struct CsvLoadResult {
  SensorField field;
  std::vector<std::string> warnings;
};

/// Reads "x1[,x2],y" rows. A non-numeric first row is treated as a header.
/// Measurements double as true means since the ground truth is unknown.
CsvLoadResult loadCsv(const std::filesystem::path& path, double noiseVariance);

}  // namespace dasgp
