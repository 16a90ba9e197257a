#pragma once

// Per-run training trajectory shared by all trainers. Serialization to JSONL
// lives in the CLI; the core only records values.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hdc {

struct EpochRecord {
  std::uint32_t epoch = 0;   // 1-based, contiguous
  double train_loss = 0.0;   // trainer's optimized quantity for the epoch
  double train_acc = 0.0;    // evaluate() on the epoch-end binary model
  double val_acc = std::nan("");  // NaN when no validation split
  double lr = 0.0;           // step size in effect during the epoch
  double wall_ms = 0.0;
};

struct RunMetrics {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  double final_test_acc = std::nan("");  // filled by callers that hold a test set
  std::map<std::string, std::string> config;  // flat config snapshot
  std::string version;
};

}  // namespace hdc
