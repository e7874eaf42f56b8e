#include "gigaudit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "gigaudit/error.hpp"

namespace gigaudit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// Thrown while converting one row; turned into a quarantine entry.
struct RowReject {
  std::string reason;
};

class RowView {
 public:
  RowView(const RawTable& table, const CsvRow& row) : table_(table), row_(row) {}

  std::string text(const std::string& field) const {
    auto it = table_.resolved.find(field);
    if (it == table_.resolved.end()) return {};
    return trim(row_.fields[it->second]);
  }

  std::optional<std::string> optional_text(const std::string& field) const {
    std::string v = text(field);
    if (v.empty()) return std::nullopt;
    return v;
  }

  std::string required(const std::string& field) const {
    std::string v = text(field);
    if (v.empty()) throw RowReject{"missing " + field};
    return v;
  }

  Timestamp timestamp(const std::string& field, const IngestOptions& o) const {
    const std::string v = required(field);
    try {
      return parse_timestamp(v, o.zone, o.naive);
    } catch (const AuditError&) {
      throw RowReject{"malformed timestamp in " + field};
    }
  }

  std::optional<Timestamp> optional_timestamp(const std::string& field, const IngestOptions& o) const {
    if (text(field).empty()) return std::nullopt;
    return timestamp(field, o);
  }

  Money money(const std::string& field, std::string_view currency) const {
    const std::string v = required(field);
    try {
      return Money::parse(v, currency);
    } catch (const AuditError&) {
      throw RowReject{"malformed money in " + field};
    }
  }

 private:
  const RawTable& table_;
  const CsvRow& row_;
};

std::string driver_of(const RowView& v, const std::string& fallback) {
  std::string id = v.text("driver_id");
  return id.empty() ? fallback : id;
}

TripRecord parse_trip(const RowView& v, const std::string& driver, const IngestOptions& o) {
  TripRecord t;
  t.driver_id = driver_of(v, driver);
  t.request_ts = v.timestamp("request_ts", o);
  t.accept_ts = v.optional_timestamp("accept_ts", o);
  t.pickup_ts = v.optional_timestamp("pickup_ts", o);
  t.dropoff_ts = v.optional_timestamp("dropoff_ts", o);
  t.cancel_ts = v.optional_timestamp("cancel_ts", o);
  const std::string dist = v.required("distance_miles");
  auto [ptr, ec] = std::from_chars(dist.data(), dist.data() + dist.size(), t.distance_miles);
  if (ec != std::errc{} || ptr != dist.data() + dist.size()) throw RowReject{"malformed distance"};
  auto status = parse_trip_status(v.required("status"));
  if (!status) throw RowReject{"unknown trip status"};
  t.status = *status;
  if (!v.text("original_fare").empty()) t.original_fare = v.money("original_fare", "GBP");
  t.origin_tag = v.text("origin_tag");
  t.dest_tag = v.text("dest_tag");
  t.product = v.text("product");
  t.pickup_address = v.optional_text("pickup_address");
  t.dropoff_address = v.optional_text("dropoff_address");
  if (auto why = t.validate()) throw RowReject{*why};
  return t;
}

PaymentEvent parse_payment(const RowView& v, const std::string& driver, const IngestOptions& o) {
  PaymentEvent p;
  p.driver_id = driver_of(v, driver);
  p.ts = v.timestamp("ts", o);
  p.category = parse_payment_category(v.text("category"));
  std::string currency = v.text("currency");
  if (currency.empty()) currency = "GBP";
  if (currency.size() != 3) throw RowReject{"malformed currency"};
  p.amount = v.money("amount", currency);
  p.memo = v.optional_text("memo");
  return p;
}

DispatchOffer parse_dispatch(const RowView& v, const std::string& driver, const IngestOptions& o) {
  DispatchOffer d;
  d.driver_id = driver_of(v, driver);
  d.offered_ts = v.timestamp("offered_ts", o);
  const std::string a = lower(v.required("accepted"));
  if (a == "true" || a == "1" || a == "yes" || a == "accepted") {
    d.accepted = true;
  } else if (a == "false" || a == "0" || a == "no" || a == "rejected" || a == "declined") {
    d.accepted = false;
  } else {
    throw RowReject{"malformed accepted flag"};
  }
  return d;
}

AppSession parse_session(const RowView& v, const std::string& driver, const IngestOptions& o) {
  AppSession s;
  s.driver_id = driver_of(v, driver);
  s.login_ts = v.timestamp("login_ts", o);
  s.logout_ts = v.timestamp("logout_ts", o);
  if (!(s.login_ts < s.logout_ts)) throw RowReject{"inverted timestamps"};
  return s;
}

DriverProfile parse_profile(const RowView& v, const std::string& driver, const IngestOptions& o) {
  DriverProfile p;
  p.driver_id = driver_of(v, driver);
  if (auto g = v.optional_text("gender"); g && lower(*g) != "unknown") {
    p.gender = parse_gender(*g);
    if (!p.gender) throw RowReject{"unknown gender value"};
  }
  if (auto a = v.optional_text("age_band")) {
    p.age_band = parse_age_band(*a);
    if (!p.age_band) throw RowReject{"age band outside enumeration"};
  }
  p.first_trip_ts = v.timestamp("first_trip_ts", o);
  p.name = v.optional_text("name");
  p.email = v.optional_text("email");
  p.home_address = v.optional_text("home_address");
  p.licence_plate = v.optional_text("licence_plate");
  return p;
}

template <typename Record, typename Parser>
void normalize_table(const RawBundle& raw, TableKind kind, const IngestOptions& o, Parser parse,
                     std::vector<Record>& out, IngestReport& report) {
  TableCounts& counts = report.counts[kind];
  auto it = raw.tables.find(kind);
  if (it == raw.tables.end()) return;
  std::set<std::vector<std::string>> seen;
  for (const RawTable& table : it->second) {
    for (const CsvRow& row : table.rows) {
      ++counts.rows_in;
      if (!row.error.empty()) {
        ++counts.quarantined;
        report.quarantine.push_back({kind, table.file, row.line, "malformed row: " + row.error});
        continue;
      }
      // Full-row equality, keyed by header name so column order is irrelevant.
      std::vector<std::pair<std::string, std::string>> cells;
      cells.reserve(table.header.size());
      for (std::size_t c = 0; c < table.header.size(); ++c) cells.emplace_back(table.header[c], row.fields[c]);
      std::sort(cells.begin(), cells.end());
      std::vector<std::string> key;
      key.reserve(cells.size() * 2);
      for (auto& [h, v] : cells) {
        key.push_back(std::move(h));
        key.push_back(std::move(v));
      }
      if (!seen.insert(std::move(key)).second) {
        ++counts.deduped;
        continue;
      }
      try {
        out.push_back(parse(RowView(table, row), raw.driver_id, o));
        ++counts.normalized;
      } catch (const RowReject& r) {
        ++counts.quarantined;
        report.quarantine.push_back({kind, table.file, row.line, r.reason});
      }
    }
  }
}

std::vector<std::string> defaults_for(std::initializer_list<const char*> names) {
  return {names.begin(), names.end()};
}

}  // namespace

std::string_view to_string(TableKind kind) {
  switch (kind) {
    case TableKind::Trips: return "trips";
    case TableKind::Payments: return "payments";
    case TableKind::Dispatches: return "dispatches";
    case TableKind::Sessions: return "sessions";
    case TableKind::Profile: return "profile";
  }
  return "trips";
}

std::optional<TableKind> parse_table_kind(std::string_view name) {
  for (TableKind k : kAllTables) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool table_required(TableKind kind) {
  return kind == TableKind::Trips || kind == TableKind::Payments;
}

const std::vector<FieldSpec>& canonical_fields(TableKind kind) {
  static const std::map<TableKind, std::vector<FieldSpec>> fields = {
      {TableKind::Trips,
       {{"driver_id", false}, {"request_ts", true}, {"accept_ts", false}, {"pickup_ts", false},
        {"dropoff_ts", false}, {"cancel_ts", false}, {"distance_miles", true}, {"status", true},
        {"original_fare", false}, {"origin_tag", false}, {"dest_tag", false}, {"product", false},
        {"pickup_address", false}, {"dropoff_address", false}}},
      {TableKind::Payments,
       {{"driver_id", false}, {"ts", true}, {"category", true}, {"amount", true}, {"currency", false},
        {"memo", false}}},
      {TableKind::Dispatches, {{"driver_id", false}, {"offered_ts", true}, {"accepted", true}}},
      {TableKind::Sessions, {{"driver_id", false}, {"login_ts", true}, {"logout_ts", true}}},
      {TableKind::Profile,
       {{"driver_id", false}, {"gender", false}, {"age_band", false}, {"first_trip_ts", true},
        {"name", false}, {"email", false}, {"home_address", false}, {"licence_plate", false}}},
  };
  return fields.at(kind);
}

ColumnMap ColumnMap::defaults() {
  ColumnMap m;
  for (TableKind k : kAllTables) {
    for (const auto& f : canonical_fields(k)) m.columns_[k][f.name] = {f.name};
  }
  auto add = [&](TableKind k, const std::string& field, std::initializer_list<const char*> extra) {
    auto& v = m.columns_[k][field];
    for (const char* e : extra) v.emplace_back(e);
  };
  add(TableKind::Trips, "driver_id", {"Driver ID", "driver_uuid"});
  add(TableKind::Trips, "request_ts", {"Request Time", "request_timestamp_local"});
  add(TableKind::Trips, "accept_ts", {"Accept Time"});
  add(TableKind::Trips, "pickup_ts", {"Begin Trip Time", "begintrip_timestamp_local"});
  add(TableKind::Trips, "dropoff_ts", {"Dropoff Time", "dropoff_timestamp_local"});
  add(TableKind::Trips, "cancel_ts", {"Cancel Time"});
  add(TableKind::Trips, "distance_miles", {"Distance (miles)", "trip_distance_miles"});
  add(TableKind::Trips, "status", {"Trip or Order Status", "status_type"});
  add(TableKind::Trips, "original_fare", {"original fare", "Original Fare", "original_fare_local"});
  add(TableKind::Trips, "product", {"Product Type", "vehicle_view_name"});
  add(TableKind::Payments, "driver_id", {"Driver ID"});
  add(TableKind::Payments, "ts", {"timestamp", "Timestamp", "local_timestamp"});
  add(TableKind::Payments, "category", {"Category", "classification"});
  add(TableKind::Payments, "amount", {"Amount", "local_amount"});
  add(TableKind::Payments, "currency", {"Currency", "currency_code"});
  add(TableKind::Payments, "memo", {"Description", "description"});
  add(TableKind::Dispatches, "offered_ts", {"Offered Time", "request_timestamp_local"});
  add(TableKind::Dispatches, "accepted", {"Accepted", "dispatch_accepted"});
  add(TableKind::Sessions, "login_ts", {"Start Time", "start_timestamp_local"});
  add(TableKind::Sessions, "logout_ts", {"End Time", "end_timestamp_local"});

  m.files_[TableKind::Trips] = defaults_for({"trips.csv", "driver_lifetime_trips.csv"});
  m.files_[TableKind::Payments] = defaults_for({"payments.csv", "driver_payments.csv", "miscellaneous_payments.csv"});
  m.files_[TableKind::Dispatches] = defaults_for({"dispatches.csv", "driver_dispatches_offered_and_accepted.csv"});
  m.files_[TableKind::Sessions] = defaults_for({"sessions.csv", "driver_online_offline.csv"});
  m.files_[TableKind::Profile] = defaults_for({"profile.csv", "driver_profile.csv"});
  return m;
}

ColumnMap ColumnMap::from_json(const json& doc) {
  ColumnMap m = defaults();
  if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_object()) {
    throw AuditError(ErrorCode::InvalidColumnMap, "column map needs a 'tables' object");
  }
  for (const auto& [table_name, table_doc] : doc["tables"].items()) {
    auto kind = parse_table_kind(table_name);
    if (!kind) throw AuditError(ErrorCode::InvalidColumnMap, "unknown table '" + table_name + "'");
    if (table_doc.contains("files")) {
      std::vector<std::string> files;
      for (const auto& f : table_doc["files"]) files.push_back(lower(f.get<std::string>()));
      m.files_[*kind] = std::move(files);
    }
    if (table_doc.contains("columns")) {
      for (const auto& [field, headers] : table_doc["columns"].items()) {
        const auto& known = canonical_fields(*kind);
        if (std::none_of(known.begin(), known.end(), [&](const FieldSpec& f) { return f.name == field; })) {
          throw AuditError(ErrorCode::InvalidColumnMap, "unknown field '" + table_name + "." + field + "'");
        }
        std::vector<std::string> list;
        if (headers.is_string()) {
          list.push_back(headers.get<std::string>());
        } else {
          for (const auto& h : headers) list.push_back(h.get<std::string>());
        }
        m.columns_[*kind][field] = std::move(list);
      }
    }
  }
  m.validate();
  return m;
}

ColumnMap ColumnMap::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw AuditError(ErrorCode::Io, "cannot open column map " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw AuditError(ErrorCode::InvalidColumnMap, e.what());
  }
}

const std::vector<std::string>& ColumnMap::candidates(TableKind kind, const std::string& field) const {
  static const std::vector<std::string> none;
  auto t = columns_.find(kind);
  if (t == columns_.end()) return none;
  auto f = t->second.find(field);
  return f == t->second.end() ? none : f->second;
}

std::optional<TableKind> ColumnMap::table_for_file(std::string_view file_name) const {
  const std::string name = lower(file_name);
  for (const auto& [kind, names] : files_) {
    if (std::find(names.begin(), names.end(), name) != names.end()) return kind;
  }
  return std::nullopt;
}

void ColumnMap::validate() const {
  for (TableKind k : kAllTables) {
    for (const auto& f : canonical_fields(k)) {
      if (f.required && candidates(k, f.name).empty()) {
        throw AuditError(ErrorCode::InvalidColumnMap,
                         "required field " + std::string(to_string(k)) + "." + f.name + " has no candidate header");
      }
    }
  }
}

json ColumnMap::to_json() const {
  json tables = json::object();
  for (const auto& [kind, cols] : columns_) {
    json t;
    t["columns"] = cols;
    auto f = files_.find(kind);
    if (f != files_.end()) t["files"] = f->second;
    tables[std::string(to_string(kind))] = t;
  }
  return json{{"tables", tables}};
}

std::size_t RawTable::malformed_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const CsvRow& r) { return !r.error.empty(); }));
}

std::size_t RawBundle::row_count(TableKind kind) const {
  auto it = tables.find(kind);
  if (it == tables.end()) return 0;
  std::size_t n = 0;
  for (const auto& t : it->second) n += t.rows.size();
  return n;
}

RawBundle load_bundle(const fs::path& dir, const ColumnMap& map, const IngestOptions& options) {
  if (!fs::is_directory(dir)) {
    throw AuditError(ErrorCode::Io, "bundle directory does not exist: " + dir.string());
  }
  RawBundle bundle;
  bundle.driver_id = dir.filename().string();

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& path : files) {
    const std::string name = path.filename().string();
    auto kind = map.table_for_file(name);
    if (!kind) {
      bundle.skipped_files.push_back(name);
      continue;
    }
    CsvTable csv = read_csv_file(path.string());
    RawTable table;
    table.kind = *kind;
    table.file = name;
    table.header = csv.header;
    for (const auto& f : canonical_fields(*kind)) {
      for (const auto& candidate : map.candidates(*kind, f.name)) {
        if (auto idx = csv.column(candidate)) {
          table.resolved[f.name] = *idx;
          break;
        }
      }
      if (f.required && !table.resolved.contains(f.name)) {
        throw AuditError(ErrorCode::MissingColumn,
                         name + " has no column for required field '" + f.name + "'");
      }
    }
    for (auto& row : csv.rows) {
      if (row.error.empty() && row.fields.size() != csv.header.size()) {
        row.error = "expected " + std::to_string(csv.header.size()) + " fields, found " +
                    std::to_string(row.fields.size());
      }
    }
    table.rows = std::move(csv.rows);
    bundle.tables[*kind].push_back(std::move(table));
  }

  if (bundle.tables.empty()) {
    throw AuditError(ErrorCode::MissingTable, "no recognized table files in " + dir.string());
  }
  for (TableKind k : kAllTables) {
    if (table_required(k) && !bundle.tables.contains(k)) {
      throw AuditError(ErrorCode::MissingTable,
                       std::string(to_string(k)) + " table absent from " + dir.string());
    }
  }
  for (const auto& [kind, parts] : bundle.tables) {
    std::size_t total = 0;
    std::size_t bad = 0;
    for (const auto& t : parts) {
      total += t.rows.size();
      bad += t.malformed_count();
    }
    if (total > 0 && static_cast<double>(bad) > options.max_malformed_fraction * static_cast<double>(total)) {
      throw AuditError(ErrorCode::MalformedRow,
                       std::to_string(bad) + " of " + std::to_string(total) + " rows malformed in " +
                           std::string(to_string(kind)) + " table of " + dir.string());
    }
  }
  return bundle;
}

json IngestReport::to_json() const {
  json counts_json = json::object();
  for (const auto& [kind, c] : counts) {
    counts_json[std::string(to_string(kind))] = {
        {"rows_in", c.rows_in}, {"normalized", c.normalized}, {"deduped", c.deduped}, {"quarantined", c.quarantined}};
  }
  json q = json::array();
  for (const auto& e : quarantine) {
    q.push_back({{"table", std::string(to_string(e.table))}, {"file", e.file}, {"line", e.line}, {"reason", e.reason}});
  }
  return {{"counts", counts_json}, {"quarantine", q}, {"skipped_files", skipped_files}};
}

NormalizedBundle normalize(const RawBundle& raw, const IngestOptions& options) {
  NormalizedBundle out;
  out.driver_id = raw.driver_id;
  out.report.skipped_files = raw.skipped_files;
  for (TableKind k : kAllTables) {
    if (raw.tables.contains(k)) out.report.counts[k];
  }
  normalize_table(raw, TableKind::Trips, options, parse_trip, out.trips, out.report);
  normalize_table(raw, TableKind::Payments, options, parse_payment, out.payments, out.report);
  normalize_table(raw, TableKind::Dispatches, options, parse_dispatch, out.dispatches, out.report);
  normalize_table(raw, TableKind::Sessions, options, parse_session, out.sessions, out.report);
  normalize_table(raw, TableKind::Profile, options, parse_profile, out.profiles, out.report);
  return out;
}

NormalizedBundle ingest_bundle(const fs::path& dir, const ColumnMap& map, const IngestOptions& options) {
  return normalize(load_bundle(dir, map, options), options);
}

std::string_view to_string(FareSemantics s) {
  return s == FareSemantics::FareIsRiderPrice ? "fare_is_rider_price" : "fare_unreliable";
}

FareSemantics fare_semantics(Era era) {
  return era == Era::OpaqueGap ? FareSemantics::FareUnreliable : FareSemantics::FareIsRiderPrice;
}

FareSemantics fare_semantics(const TripRecord& trip, const EraBoundaries& eras, const TimeZone& zone) {
  return fare_semantics(era_of(trip.request_ts, eras, zone));
}

std::vector<FareSemantics> detect_fare_semantics(const std::vector<TripRecord>& trips, const EraBoundaries& eras,
                                                 const TimeZone& zone) {
  std::vector<FareSemantics> out;
  out.reserve(trips.size());
  for (const auto& t : trips) out.push_back(fare_semantics(t, eras, zone));
  return out;
}

namespace {

std::string ts_text(const std::optional<Timestamp>& t) { return t ? format_timestamp(*t) : std::string(); }

std::string distance_text(double miles) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", miles);
  std::string s = buf;
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

// Column set with optional columns included only when some record uses them.
template <typename Record>
std::vector<std::string> header_for(const std::vector<std::string>& always,
                                    const std::vector<std::pair<std::string, std::optional<std::string> Record::*>>& optional,
                                    const std::vector<Record>& records) {
  std::vector<std::string> h = always;
  for (const auto& [name, member] : optional) {
    if (std::any_of(records.begin(), records.end(), [&](const Record& r) { return (r.*member).has_value(); })) {
      h.push_back(name);
    }
  }
  return h;
}

}  // namespace

std::map<std::string, std::string> serialize_bundle(const NormalizedBundle& b) {
  std::map<std::string, std::string> files;

  {
    const auto header = header_for<TripRecord>(
        {"driver_id", "request_ts", "accept_ts", "pickup_ts", "dropoff_ts", "cancel_ts", "distance_miles", "status",
         "original_fare", "origin_tag", "dest_tag", "product"},
        {{"pickup_address", &TripRecord::pickup_address}, {"dropoff_address", &TripRecord::dropoff_address}}, b.trips);
    std::string out;
    append_csv_row(out, header);
    for (const auto& t : b.trips) {
      std::vector<std::string> row = {t.driver_id,
                                      format_timestamp(t.request_ts),
                                      ts_text(t.accept_ts),
                                      ts_text(t.pickup_ts),
                                      ts_text(t.dropoff_ts),
                                      ts_text(t.cancel_ts),
                                      distance_text(t.distance_miles),
                                      std::string(to_string(t.status)),
                                      t.original_fare ? t.original_fare->to_string() : std::string(),
                                      t.origin_tag,
                                      t.dest_tag,
                                      t.product};
      for (std::size_t i = 12; i < header.size(); ++i) {
        const auto& v = header[i] == "pickup_address" ? t.pickup_address : t.dropoff_address;
        row.push_back(v.value_or(""));
      }
      append_csv_row(out, row);
    }
    files["trips.csv"] = std::move(out);
  }
  {
    const bool foreign = std::any_of(b.payments.begin(), b.payments.end(),
                                     [](const PaymentEvent& p) { return p.amount.currency() != "GBP"; });
    auto header = header_for<PaymentEvent>({"driver_id", "ts", "category", "amount"},
                                           {{"memo", &PaymentEvent::memo}}, b.payments);
    if (foreign) header.insert(header.begin() + 4, "currency");
    std::string out;
    append_csv_row(out, header);
    for (const auto& p : b.payments) {
      std::vector<std::string> row = {p.driver_id, format_timestamp(p.ts), std::string(to_string(p.category)),
                                      p.amount.to_string()};
      if (foreign) row.push_back(p.amount.currency());
      if (header.back() == "memo") row.push_back(p.memo.value_or(""));
      append_csv_row(out, row);
    }
    files["payments.csv"] = std::move(out);
  }
  if (!b.dispatches.empty() || b.report.counts.contains(TableKind::Dispatches)) {
    std::string out;
    append_csv_row(out, {"driver_id", "offered_ts", "accepted"});
    for (const auto& d : b.dispatches) {
      append_csv_row(out, {d.driver_id, format_timestamp(d.offered_ts), d.accepted ? "true" : "false"});
    }
    files["dispatches.csv"] = std::move(out);
  }
  if (!b.sessions.empty() || b.report.counts.contains(TableKind::Sessions)) {
    std::string out;
    append_csv_row(out, {"driver_id", "login_ts", "logout_ts"});
    for (const auto& s : b.sessions) {
      append_csv_row(out, {s.driver_id, format_timestamp(s.login_ts), format_timestamp(s.logout_ts)});
    }
    files["sessions.csv"] = std::move(out);
  }
  if (!b.profiles.empty() || b.report.counts.contains(TableKind::Profile)) {
    const bool has_gender = std::any_of(b.profiles.begin(), b.profiles.end(),
                                        [](const DriverProfile& p) { return p.gender.has_value(); });
    const bool has_age = std::any_of(b.profiles.begin(), b.profiles.end(),
                                     [](const DriverProfile& p) { return p.age_band.has_value(); });
    std::vector<std::string> always = {"driver_id"};
    if (has_gender) always.push_back("gender");
    if (has_age) always.push_back("age_band");
    always.push_back("first_trip_ts");
    const auto header = header_for<DriverProfile>(always,
                                                  {{"name", &DriverProfile::name},
                                                   {"email", &DriverProfile::email},
                                                   {"home_address", &DriverProfile::home_address},
                                                   {"licence_plate", &DriverProfile::licence_plate}},
                                                  b.profiles);
    std::string out;
    append_csv_row(out, header);
    for (const auto& p : b.profiles) {
      std::vector<std::string> row;
      for (const auto& col : header) {
        if (col == "driver_id") row.push_back(p.driver_id);
        else if (col == "gender") row.push_back(p.gender ? std::string(to_string(*p.gender)) : "");
        else if (col == "age_band") row.push_back(p.age_band ? std::string(to_string(*p.age_band)) : "");
        else if (col == "first_trip_ts") row.push_back(format_timestamp(p.first_trip_ts));
        else if (col == "name") row.push_back(p.name.value_or(""));
        else if (col == "email") row.push_back(p.email.value_or(""));
        else if (col == "home_address") row.push_back(p.home_address.value_or(""));
        else if (col == "licence_plate") row.push_back(p.licence_plate.value_or(""));
      }
      append_csv_row(out, row);
    }
    files["profile.csv"] = std::move(out);
  }
  return files;
}

void write_bundle(const NormalizedBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, contents] : serialize_bundle(bundle)) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw AuditError(ErrorCode::Io, "cannot write " + (dir / name).string());
    out << contents;
  }
}

std::vector<fs::path> find_bundle_dirs(const fs::path& root) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(root)) return dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    bool has_csv = false;
    for (const auto& f : fs::directory_iterator(entry.path())) {
      if (f.is_regular_file() && lower(f.path().extension().string()) == ".csv") {
        has_csv = true;
        break;
      }
    }
    if (has_csv) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace gigaudit
