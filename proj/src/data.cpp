// SPDX-License-Identifier: Apache-2.0
#include "strap/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "strap/errors.hpp"

namespace strap {

const char* to_string(AmenityKind k) {
  switch (k) {
    case AmenityKind::school: return "school";
    case AmenityKind::hospital: return "hospital";
    case AmenityKind::store: return "store";
  }
  return "?";
}

const char* to_string(StationKind k) {
  switch (k) {
    case StationKind::train: return "train";
    case StationKind::subway: return "subway";
    case StationKind::bus: return "bus";
  }
  return "?";
}

AmenityKind amenity_kind_from_string(const std::string& s) {
  if (s == "school") return AmenityKind::school;
  if (s == "hospital") return AmenityKind::hospital;
  if (s == "store") return AmenityKind::store;
  throw DataError("unknown amenity kind '" + s + "'");
}

StationKind station_kind_from_string(const std::string& s) {
  if (s == "train") return StationKind::train;
  if (s == "subway") return StationKind::subway;
  if (s == "bus") return StationKind::bus;
  throw DataError("unknown station kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// CSV plumbing. The table formats are plain numeric CSV with a header row;
// no quoting or escaping is involved.

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;   // data rows
  std::vector<std::size_t> line_numbers;        // physical line per data row
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvTable t;
  t.file = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split_csv_line(line);
    } else {
      t.rows.push_back(split_csv_line(line));
      t.line_numbers.push_back(line_no);
    }
  }
  if (t.header.empty()) throw DataError(path + ": empty file");
  return t;
}

[[noreturn]] void row_error(const CsvTable& t, std::size_t row, const std::string& msg) {
  throw DataError(t.file + ":" + std::to_string(t.line_numbers[row]) + ": " + msg);
}

double parse_real(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    row_error(t, row, "column '" + t.header[col] + "': not a number: '" + s + "'");
  }
  if (!std::isfinite(v)) {
    row_error(t, row, "column '" + t.header[col] + "': non-finite value");
  }
  return v;
}

std::int64_t parse_int(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    row_error(t, row, "column '" + t.header[col] + "': not an integer: '" + s + "'");
  }
  return v;
}

// Verifies the fixed prefix columns and a trailing block named
// <stem>_0 .. <stem>_{k-1}; returns k.
std::size_t check_header(const CsvTable& t, const std::vector<std::string>& fixed,
                         const std::string& stem) {
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (i >= t.header.size() || t.header[i] != fixed[i]) {
      throw DataError(t.file + ": missing column '" + fixed[i] + "' (header is '" +
                      (i < t.header.size() ? t.header[i] : "<absent>") + "')");
    }
  }
  const std::size_t k = t.header.size() - fixed.size();
  for (std::size_t j = 0; j < k; ++j) {
    const std::string want = stem + "_" + std::to_string(j);
    if (t.header[fixed.size() + j] != want) {
      throw DataError(t.file + ": expected feature column '" + want + "', found '" +
                      t.header[fixed.size() + j] + "'");
    }
  }
  return k;
}

void check_row_width(const CsvTable& t, std::size_t row) {
  if (t.rows[row].size() != t.header.size()) {
    row_error(t, row, "expected " + std::to_string(t.header.size()) + " fields, found " +
                          std::to_string(t.rows[row].size()));
  }
}

void check_lat_lon(const CsvTable& t, std::size_t row, double lat, double lon) {
  if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
    row_error(t, row, "coordinates out of range (lat " + std::to_string(lat) + ", lon " +
                          std::to_string(lon) + ")");
  }
}

void write_real(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

// ---------------------------------------------------------------------------

void Dataset::finalize() {
  resident_index.clear();
  for (std::size_t i = 0; i < residents.size(); ++i) {
    auto [it, inserted] = resident_index.emplace(residents[i].resident_id, i);
    if (!inserted) {
      throw DataError("duplicate resident_id " + std::to_string(residents[i].resident_id));
    }
    residents[i].history.clear();
  }
  std::unordered_map<std::int64_t, std::size_t> txn_ids;
  txn_ids.reserve(transactions.size());
  for (std::size_t i = 0; i < transactions.size(); ++i) {
    const TransactionEvent& e = transactions[i];
    if (!txn_ids.emplace(e.transaction_id, i).second) {
      throw DataError("duplicate transaction_id " + std::to_string(e.transaction_id));
    }
    auto it = resident_index.find(e.resident_id);
    if (it == resident_index.end()) {
      throw DataError("transaction " + std::to_string(e.transaction_id) +
                      " references unknown resident_id " + std::to_string(e.resident_id));
    }
    residents[it->second].history.push_back(i);
  }
  for (Resident& r : residents) {
    std::sort(r.history.begin(), r.history.end(), [&](std::size_t a, std::size_t b) {
      const TransactionEvent& ea = transactions[a];
      const TransactionEvent& eb = transactions[b];
      if (ea.timestamp != eb.timestamp) return ea.timestamp < eb.timestamp;
      return ea.transaction_id < eb.transaction_id;
    });
  }
}

std::size_t Dataset::resident_pos(std::int64_t id) const {
  auto it = resident_index.find(id);
  if (it == resident_index.end()) {
    throw DataError("unknown resident_id " + std::to_string(id));
  }
  return it->second;
}

std::size_t Dataset::history_prefix_before(std::size_t pos, std::int64_t timestamp) const {
  const std::vector<std::size_t>& h = residents[pos].history;
  // histories are sorted by (timestamp, id); count entries with ts < timestamp
  std::size_t lo = 0, hi = h.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (transactions[h[mid]].timestamp < timestamp) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

Dataset load_dataset(const std::string& dir) {
  Dataset ds;

  CsvTable rt = read_csv(dir + "/residents.csv");
  ds.d_r = check_header(rt, {"resident_id", "lat", "lon"}, "rf");
  ds.residents.reserve(rt.rows.size());
  for (std::size_t i = 0; i < rt.rows.size(); ++i) {
    check_row_width(rt, i);
    Resident r;
    r.resident_id = parse_int(rt, i, 0);
    r.lat = parse_real(rt, i, 1);
    r.lon = parse_real(rt, i, 2);
    check_lat_lon(rt, i, r.lat, r.lon);
    r.features.resize(ds.d_r);
    for (std::size_t j = 0; j < ds.d_r; ++j) r.features[j] = parse_real(rt, i, 3 + j);
    ds.residents.push_back(std::move(r));
  }

  CsvTable tt = read_csv(dir + "/transactions.csv");
  ds.d_e = check_header(tt, {"transaction_id", "resident_id", "timestamp", "price"}, "ef");
  ds.transactions.reserve(tt.rows.size());
  for (std::size_t i = 0; i < tt.rows.size(); ++i) {
    check_row_width(tt, i);
    TransactionEvent e;
    e.transaction_id = parse_int(tt, i, 0);
    e.resident_id = parse_int(tt, i, 1);
    e.timestamp = parse_int(tt, i, 2);
    e.price = parse_real(tt, i, 3);
    if (e.price <= 0.0) row_error(tt, i, "price must be positive");
    e.features.resize(ds.d_e);
    for (std::size_t j = 0; j < ds.d_e; ++j) e.features[j] = parse_real(tt, i, 4 + j);
    ds.transactions.push_back(std::move(e));
  }

  CsvTable at = read_csv(dir + "/amenities.csv");
  ds.d_a = check_header(at, {"amenity_id", "lat", "lon", "kind"}, "af");
  for (std::size_t i = 0; i < at.rows.size(); ++i) {
    check_row_width(at, i);
    Amenity a;
    a.amenity_id = parse_int(at, i, 0);
    a.lat = parse_real(at, i, 1);
    a.lon = parse_real(at, i, 2);
    check_lat_lon(at, i, a.lat, a.lon);
    try {
      a.kind = amenity_kind_from_string(at.rows[i][3]);
    } catch (const DataError& e) {
      row_error(at, i, e.what());
    }
    a.features.resize(ds.d_a);
    for (std::size_t j = 0; j < ds.d_a; ++j) a.features[j] = parse_real(at, i, 4 + j);
    ds.amenities.push_back(std::move(a));
  }

  CsvTable st = read_csv(dir + "/stations.csv");
  ds.d_s = check_header(st, {"station_id", "lat", "lon", "kind"}, "sf");
  for (std::size_t i = 0; i < st.rows.size(); ++i) {
    check_row_width(st, i);
    Station s;
    s.station_id = parse_int(st, i, 0);
    s.lat = parse_real(st, i, 1);
    s.lon = parse_real(st, i, 2);
    check_lat_lon(st, i, s.lat, s.lon);
    try {
      s.kind = station_kind_from_string(st.rows[i][3]);
    } catch (const DataError& e) {
      row_error(st, i, e.what());
    }
    s.features.resize(ds.d_s);
    for (std::size_t j = 0; j < ds.d_s; ++j) s.features[j] = parse_real(st, i, 4 + j);
    ds.stations.push_back(std::move(s));
  }

  try {
    ds.finalize();
  } catch (const DataError& e) {
    // attach the offending row number for dangling transaction references
    for (std::size_t i = 0; i < ds.transactions.size(); ++i) {
      if (ds.resident_index.find(ds.transactions[i].resident_id) == ds.resident_index.end()) {
        row_error(tt, i, e.what());
      }
    }
    throw;
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  {
    std::string out = "resident_id,lat,lon";
    for (std::size_t j = 0; j < ds.d_r; ++j) out += ",rf_" + std::to_string(j);
    out += "\n";
    for (const Resident& r : ds.residents) {
      out += std::to_string(r.resident_id);
      out += ',';
      write_real(out, r.lat);
      out += ',';
      write_real(out, r.lon);
      for (double f : r.features) {
        out += ',';
        write_real(out, f);
      }
      out += "\n";
    }
    std::ofstream f(dir + "/residents.csv", std::ios::binary);
    if (!f) throw DataError("cannot write " + dir + "/residents.csv");
    f << out;
  }
  {
    std::string out = "transaction_id,resident_id,timestamp,price";
    for (std::size_t j = 0; j < ds.d_e; ++j) out += ",ef_" + std::to_string(j);
    out += "\n";
    for (const TransactionEvent& e : ds.transactions) {
      out += std::to_string(e.transaction_id);
      out += ',' + std::to_string(e.resident_id);
      out += ',' + std::to_string(e.timestamp);
      out += ',';
      write_real(out, e.price);
      for (double f : e.features) {
        out += ',';
        write_real(out, f);
      }
      out += "\n";
    }
    std::ofstream f(dir + "/transactions.csv", std::ios::binary);
    if (!f) throw DataError("cannot write " + dir + "/transactions.csv");
    f << out;
  }
  {
    std::string out = "amenity_id,lat,lon,kind";
    for (std::size_t j = 0; j < ds.d_a; ++j) out += ",af_" + std::to_string(j);
    out += "\n";
    for (const Amenity& a : ds.amenities) {
      out += std::to_string(a.amenity_id);
      out += ',';
      write_real(out, a.lat);
      out += ',';
      write_real(out, a.lon);
      out += ',';
      out += to_string(a.kind);
      for (double f : a.features) {
        out += ',';
        write_real(out, f);
      }
      out += "\n";
    }
    std::ofstream f(dir + "/amenities.csv", std::ios::binary);
    if (!f) throw DataError("cannot write " + dir + "/amenities.csv");
    f << out;
  }
  {
    std::string out = "station_id,lat,lon,kind";
    for (std::size_t j = 0; j < ds.d_s; ++j) out += ",sf_" + std::to_string(j);
    out += "\n";
    for (const Station& s : ds.stations) {
      out += std::to_string(s.station_id);
      out += ',';
      write_real(out, s.lat);
      out += ',';
      write_real(out, s.lon);
      out += ',';
      out += to_string(s.kind);
      for (double f : s.features) {
        out += ',';
        write_real(out, f);
      }
      out += "\n";
    }
    std::ofstream f(dir + "/stations.csv", std::ios::binary);
    if (!f) throw DataError("cannot write " + dir + "/stations.csv");
    f << out;
  }
}

// ---------------------------------------------------------------------------

void SplitRatios::validate() const {
  if (train <= 0.0 || val <= 0.0 || test <= 0.0) {
    throw ConfigError("split ratios must be positive");
  }
  if (std::fabs(train + val + test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
}

Split chronological_split(const Dataset& ds, SplitRatios ratios) {
  ratios.validate();
  const std::size_t n = ds.transactions.size();
  if (n < 3) throw DataError("chronological_split: need at least 3 transactions, have " +
                             std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const TransactionEvent& ea = ds.transactions[a];
    const TransactionEvent& eb = ds.transactions[b];
    if (ea.timestamp != eb.timestamp) return ea.timestamp < eb.timestamp;
    return ea.transaction_id < eb.transaction_id;
  });
  // floor for val/test, remainder to train
  const std::size_t n_val = static_cast<std::size_t>(static_cast<double>(n) * ratios.val);
  const std::size_t n_test = static_cast<std::size_t>(static_cast<double>(n) * ratios.test);
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    throw DataError("chronological_split: ratios leave an empty slice for n=" +
                    std::to_string(n));
  }
  const std::size_t n_train = n - n_val - n_test;
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  s.val.assign(order.begin() + static_cast<long>(n_train),
               order.begin() + static_cast<long>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<long>(n_train + n_val), order.end());
  return s;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> cold_warm_partition(
    const Dataset& ds, const std::vector<std::size_t>& ids) {
  std::vector<std::size_t> cold, warm;
  for (std::size_t idx : ids) {
    const TransactionEvent& e = ds.transactions[idx];
    const std::size_t rpos = ds.resident_pos(e.resident_id);
    if (ds.history_prefix_before(rpos, e.timestamp) == 0) {
      cold.push_back(idx);
    } else {
      warm.push_back(idx);
    }
  }
  return {std::move(cold), std::move(warm)};
}

// ---------------------------------------------------------------------------

namespace {

void column_stats(const std::vector<const std::vector<double>*>& rows, std::size_t dim,
                  std::vector<double>& mean, std::vector<double>& std) {
  mean.assign(dim, 0.0);
  std.assign(dim, 1.0);
  if (rows.empty()) return;
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (const auto* r : rows) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += (*r)[j];
  }
  for (std::size_t j = 0; j < dim; ++j) mean[j] *= inv;
  std::vector<double> var(dim, 0.0);
  for (const auto* r : rows) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = (*r)[j] - mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    const double s = std::sqrt(var[j] * inv);
    std[j] = s > 0.0 ? s : 1.0;
  }
}

}  // namespace

NormStats compute_norm_stats(const Dataset& ds, const std::vector<std::size_t>& train_ids) {
  NormStats ns;
  if (!train_ids.empty()) {
    double m = 0.0;
    for (std::size_t i : train_ids) m += ds.transactions[i].price;
    m /= static_cast<double>(train_ids.size());
    double v = 0.0;
    for (std::size_t i : train_ids) {
      const double d = ds.transactions[i].price - m;
      v += d * d;
    }
    v /= static_cast<double>(train_ids.size());
    ns.price_mean = m;
    ns.price_std = v > 0.0 ? std::sqrt(v) : 1.0;
  }
  std::vector<const std::vector<double>*> rows;
  rows.reserve(train_ids.size());
  for (std::size_t i : train_ids) rows.push_back(&ds.transactions[i].features);
  column_stats(rows, ds.d_e, ns.ef_mean, ns.ef_std);

  rows.clear();
  for (const Resident& r : ds.residents) rows.push_back(&r.features);
  column_stats(rows, ds.d_r, ns.rf_mean, ns.rf_std);

  rows.clear();
  for (const Amenity& a : ds.amenities) rows.push_back(&a.features);
  column_stats(rows, ds.d_a, ns.af_mean, ns.af_std);

  rows.clear();
  for (const Station& s : ds.stations) rows.push_back(&s.features);
  column_stats(rows, ds.d_s, ns.sf_mean, ns.sf_std);
  return ns;
}

// ---------------------------------------------------------------------------
// Checkpoint container.

namespace {

constexpr char kMagic[8] = {'S', 'T', 'R', 'A', 'P', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& at) {
  if (at + sizeof(T) > in.size()) throw DataError("checkpoint: truncated file");
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

const Tensor& Checkpoint::require(const std::string& name) const {
  const Tensor* t = find(name);
  if (!t) throw DataError("checkpoint: missing tensor '" + name + "'");
  return *t;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string body;
  put<std::uint64_t>(body, ckpt.config_json.size());
  body += ckpt.config_json;
  put<std::uint32_t>(body, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put<std::uint32_t>(body, static_cast<std::uint32_t>(name.size()));
    body += name;
    put<std::uint32_t>(body, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t e : t.shape) put<std::uint64_t>(body, e);
    body.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
  }

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, fnv1a64(reinterpret_cast<const unsigned char*>(body.data()),
                                  body.size()));
  put<std::uint64_t>(out, body.size());
  out += body;

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write checkpoint " + path);
  f.write(out.data(), static_cast<long>(out.size()));
  if (!f) throw DataError("short write on checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string raw = buf.str();

  std::size_t at = 0;
  if (raw.size() < sizeof(kMagic) || std::memcmp(raw.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint " + path + ": bad magic");
  }
  at = sizeof(kMagic);
  const auto version = get<std::uint32_t>(raw, at);
  if (version != kVersion) {
    throw DataError("checkpoint " + path + ": unsupported version " + std::to_string(version));
  }
  const auto want_hash = get<std::uint64_t>(raw, at);
  const auto body_len = get<std::uint64_t>(raw, at);
  if (at + body_len != raw.size()) {
    throw DataError("checkpoint " + path + ": body length mismatch");
  }
  const std::string body = raw.substr(at);
  if (fnv1a64(reinterpret_cast<const unsigned char*>(body.data()), body.size()) != want_hash) {
    throw DataError("checkpoint " + path + ": body hash mismatch (corrupt file)");
  }

  std::size_t p = 0;
  Checkpoint ckpt;
  const auto cfg_len = get<std::uint64_t>(body, p);
  if (p + cfg_len > body.size()) throw DataError("checkpoint: truncated config blob");
  ckpt.config_json = body.substr(p, cfg_len);
  p += cfg_len;
  const auto n_tensors = get<std::uint32_t>(body, p);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto name_len = get<std::uint32_t>(body, p);
    if (p + name_len > body.size()) throw DataError("checkpoint: truncated tensor name");
    std::string name = body.substr(p, name_len);
    p += name_len;
    const auto rank = get<std::uint32_t>(body, p);
    if (rank > 8) throw DataError("checkpoint: implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& e : shape) {
      e = static_cast<std::size_t>(get<std::uint64_t>(body, p));
      count *= e;
    }
    if (p + count * sizeof(double) > body.size()) {
      throw DataError("checkpoint: tensor '" + name + "' data exceeds file");
    }
    std::vector<double> data(count);
    std::memcpy(data.data(), body.data() + p, count * sizeof(double));
    p += count * sizeof(double);
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (p != body.size()) throw DataError("checkpoint: trailing bytes after tensor directory");
  return ckpt;
}

}  // namespace strap
