#pragma once

#include <string>
#include <vector>

#include "lago/types.hpp"

namespace lago {

// Shortest round-trip textual form of a double (17-significant-digit
// equivalent); used for all machine-readable numeric output.
std::string format_double(double value);

// Reads a participant-level dataset with header stage,centre,arm,a1..aP,y.
// arm is 0 (control) or 1 (intervention); control rows must have all
// intervention columns equal to zero. Returns a finalized dataset.
TrialDataset read_dataset(const std::string& path);

void write_dataset(const std::string& path, const TrialDataset& dataset);

// One row per replicate, column schema documented in the README.
void write_replicate_csv(const std::string& path,
                         const std::vector<ReplicateMetrics>& rows, int P);

// Grid membership table: x1..xP,in_set.
void write_set_csv(const std::string& path, const ConfidenceSetResult& set);

// Simultaneous band table: x1..xP,lower,upper.
void write_band_csv(const std::string& path, const ConfidenceBandResult& band);

}  // namespace lago
