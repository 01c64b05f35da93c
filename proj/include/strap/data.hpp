// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "strap/tensor.hpp"

namespace strap {

// One recorded sale: feature vector, price in millions of KRW, timestamp
// in days since the dataset epoch.
struct TransactionEvent {
  std::int64_t transaction_id = 0;
  std::int64_t resident_id = 0;
  std::int64_t timestamp = 0;
  double price = 0.0;
  std::vector<double> features;  // ef, dim d_e
};

// A residential community plus its transaction history (indexes into
// Dataset::transactions, ordered by (timestamp, transaction_id)).
struct Resident {
  std::int64_t resident_id = 0;
  double lat = 0.0, lon = 0.0;
  std::vector<double> features;  // rf, dim d_r
  std::vector<std::size_t> history;
};

enum class AmenityKind { school, hospital, store };
enum class StationKind { train, subway, bus };

const char* to_string(AmenityKind k);
const char* to_string(StationKind k);
AmenityKind amenity_kind_from_string(const std::string& s);
StationKind station_kind_from_string(const std::string& s);

struct Amenity {
  std::int64_t amenity_id = 0;
  double lat = 0.0, lon = 0.0;
  AmenityKind kind = AmenityKind::school;
  std::vector<double> features;  // af, dim d_a
};

struct Station {
  std::int64_t station_id = 0;
  double lat = 0.0, lon = 0.0;
  StationKind kind = StationKind::bus;
  std::vector<double> features;  // sf, dim d_s
};

// The four entity tables. Immutable once loaded; all cross-references are
// validated and resolved to vector indexes.
struct Dataset {
  std::vector<Resident> residents;
  std::vector<TransactionEvent> transactions;
  std::vector<Amenity> amenities;
  std::vector<Station> stations;
  std::size_t d_e = 0, d_r = 0, d_a = 0, d_s = 0;

  std::unordered_map<std::int64_t, std::size_t> resident_index;

  // Builds indexes and per-resident histories; throws DataError on dangling
  // ids, duplicate ids, non-finite values or out-of-range coordinates.
  void finalize();

  std::size_t resident_pos(std::int64_t resident_id) const;

  // Number of the resident's transactions strictly earlier than `timestamp`.
  std::size_t history_prefix_before(std::size_t resident_pos, std::int64_t timestamp) const;
};

Dataset load_dataset(const std::string& dir);
void save_dataset(const Dataset& ds, const std::string& dir);

struct SplitRatios {
  double train = 0.90, val = 0.05, test = 0.05;
  void validate() const;
};

// Transaction indexes in global chronological order per slice.
struct Split {
  std::vector<std::size_t> train, val, test;
};

// Sorts all transactions by (timestamp, transaction_id); val and test get
// floor(ratio * n) transactions each, the remainder goes to train.
Split chronological_split(const Dataset& ds, SplitRatios ratios = {});

// COLD: the transaction's resident has no strictly-earlier transaction
// anywhere in the dataset. Returns (cold, warm), each preserving the order
// of `ids`; the two are disjoint and together cover `ids`.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> cold_warm_partition(
    const Dataset& ds, const std::vector<std::size_t>& ids);

// Per-column mean/std computed on the training split only (transaction
// columns); entity feature tables are static and use all rows. Zero-variance
// columns get std 1 so standardization is a no-op for them.
struct NormStats {
  double price_mean = 0.0, price_std = 1.0;
  std::vector<double> ef_mean, ef_std;
  std::vector<double> rf_mean, rf_std;
  std::vector<double> af_mean, af_std;
  std::vector<double> sf_mean, sf_std;
};

NormStats compute_norm_stats(const Dataset& ds, const std::vector<std::size_t>& train_ids);

// Versioned binary container: magic, version, body hash, config JSON blob,
// then a directory of named tensors (shapes + little-endian 64-bit reals).
struct Checkpoint {
  std::string config_json;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
  const Tensor& require(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace strap
