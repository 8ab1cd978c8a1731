#pragma once

// Flat little-endian binary container for an expansion matrix, its
// thresholds and, optionally, a learned readout. The byte layout is given in
// docs/formats.md.

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "sparsecode/approximator.hpp"
#include "sparsecode/encoder.hpp"

namespace sparsecode {

inline constexpr char kContainerMagic[5] = {'E', 'A', 'S', 'P', '1'};
inline constexpr std::size_t kContainerHeaderBytes = 80;

struct Container {
  std::shared_ptr<const ExpansionMatrixd> theta;
  Sparsifierd sparsifier;
  // Input manifold the thresholds and weights were fitted on, when known.
  std::optional<ManifoldSpec> manifold;
  std::optional<ApproximatorModel> model;
};

/// Encoder only: Theta plus the sparsifier (and tau under thresholding).
void write_encoder(std::ostream& out, const ExpansionMatrixd& theta, const Sparsifierd& sparsifier,
                   const std::optional<ManifoldSpec>& manifold);

/// Encoder followed by the weights, counts and good-mask sections.
void write_model(std::ostream& out, const ApproximatorModel& model, const std::optional<ManifoldSpec>& manifold);

/// Throws FormatError on a bad magic, truncated input or inconsistent header.
Container read_container(std::istream& in);

void save_encoder(const std::string& path, const ExpansionMatrixd& theta, const Sparsifierd& sparsifier,
                  const std::optional<ManifoldSpec>& manifold);
void save_model(const std::string& path, const ApproximatorModel& model, const std::optional<ManifoldSpec>& manifold);
Container load_container(const std::string& path);

}  // namespace sparsecode
