#pragma once

#include "mrgap/denoiser.hpp"

#include <filesystem>

namespace mrgap {

inline constexpr int kTraceSchema = 1;

/// A trace together with the configuration that produced it.
struct StoredTrace {
  DenoiseConfig config;
  DenoiseTrace trace;
};

enum class CloudStorage {
  embedded,    ///< every cloud inline as a "points" array
  referenced,  ///< every cloud in a sibling CSV, referenced by relative path
};

/// JSON layout:
///   { "schema": 1,
///     "config": {"epsilon", "delta", "intrinsic_dim", "max_iter", "sigma_tol"?, "relative_sigma_tol"},
///     "rounds": I,
///     "hypers": [{"A", "rho", "sigma"}, ...], "sigma_history": [...], "objectives": [...],
///     "variances": [[...], ...],
///     "clouds": [{"points": [[...], ...]} | {"csv": "name.csv"}, ...] }
/// Referenced clouds are written as <stem>.cloud<i>.csv next to the trace.
void save_trace(const StoredTrace& stored, const std::filesystem::path& path,
                CloudStorage storage = CloudStorage::embedded);

/// Throws ParseError on malformed documents or an unknown schema version.
StoredTrace load_trace(const std::filesystem::path& path);

}  // namespace mrgap
