#pragma once

#include <filesystem>
#include <optional>

#include "certmon/conformal.hpp"
#include "certmon/predictor.hpp"

namespace certmon {

/// A calibrated monitor together with the predictor it was calibrated against.
struct StoredModel {
  CalibratedMonitor monitor;
  std::optional<PredictorStub> predictor;
};

/// Writes `path` (JSON) and the score cache next to it as `<stem>.scores.csv`.
///
/// Cache CSV layout:
///   # certmon-score-cache version=1
///   # kind=<semantic|rolling|observer> symmetric=<0|1> rows=<n> dim=<r>
///   tau,c0,c1,...,c{r-1}
///   <tau or -1 for Level-1>,<raw error>,...
/// Values are printed with 17 significant digits so they round-trip exactly.
void save_model(const StoredModel& model, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

void save_score_cache(const ScoreCache& cache, MonitorKind kind, const std::filesystem::path& path);
ScoreCache load_score_cache(const std::filesystem::path& path);

std::filesystem::path score_cache_path(const std::filesystem::path& model_path);

}  // namespace certmon
