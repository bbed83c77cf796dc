#include <charconv>
#include <cmath>
#include <limits>

#include "idoe/doe.hpp"
#include "idoe/error.hpp"

namespace idoe {

const std::vector<std::string>& ensemble_csv_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c{"run_id"};
    const auto& sim = cycle_csv_columns();
    c.insert(c.end(), sim.begin(), sim.end());
    c.push_back("provenance");
    c.push_back("iteration");
    return c;
  }();
  return columns;
}

namespace {

void append_field(std::string& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out += field;
    return;
  }
  out += '"';
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
}

void append_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    append_field(out, fields[i]);
  }
  out += '\n';
}

// RFC 4180 records; quoted fields may contain separators and newlines.
std::vector<std::vector<std::string>> parse_records(std::string_view doc) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const char ch = doc[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < doc.size() && doc[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        any = false;
        break;
      default:
        field += ch;
        any = true;
    }
  }
  if (quoted) throw Error(ErrorKind::SchemaMismatch, "unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_double(const std::string& s, const std::string& column, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  // from_chars rejects a leading '+', which never appears in our output.
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorKind::SchemaMismatch,
                "column '" + column + "' line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s, const std::string& column, std::size_t line) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::SchemaMismatch,
                "column '" + column + "' line " + std::to_string(line) + ": not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string export_csv(std::span<const Run> runs) {
  std::string out;
  append_row(out, ensemble_csv_columns());
  for (const auto& r : runs) {
    std::vector<std::string> fields{std::to_string(r.id)};
    auto sim = cycle_csv_fields(r.params, r.result);
    fields.insert(fields.end(), std::make_move_iterator(sim.begin()), std::make_move_iterator(sim.end()));
    fields.emplace_back(to_string(r.provenance));
    fields.push_back(std::to_string(r.iteration));
    append_row(out, fields);
  }
  return out;
}

std::string export_csv(const Ensemble& ensemble, std::span<const std::uint64_t> ids) {
  std::vector<Run> selected;
  selected.reserve(ids.size());
  for (auto id : ids) {
    const Run* r = ensemble.find(id);
    if (!r) throw Error(ErrorKind::NotFound, "run " + std::to_string(id) + " does not exist");
    selected.push_back(*r);
  }
  return export_csv(selected);
}

std::vector<Run> import_csv(std::string_view document, const RefrigerantModel& model) {
  const auto rows = parse_records(document);
  const auto& columns = ensemble_csv_columns();
  if (rows.empty()) throw Error(ErrorKind::SchemaMismatch, "missing header row (expected column 'run_id')");
  const auto& header = rows.front();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c >= header.size()) throw Error(ErrorKind::SchemaMismatch, "missing column '" + columns[c] + "'");
    if (header[c] != columns[c]) {
      throw Error(ErrorKind::SchemaMismatch, "expected column '" + columns[c] + "' at position " +
                                                 std::to_string(c + 1) + ", found '" + header[c] + "'");
    }
  }
  if (header.size() > columns.size()) {
    throw Error(ErrorKind::SchemaMismatch, "unexpected column '" + header[columns.size()] + "'");
  }

  std::vector<Run> runs;
  runs.reserve(rows.size() - 1);
  for (std::size_t line = 1; line < rows.size(); ++line) {
    const auto& f = rows[line];
    if (f.size() != columns.size()) {
      throw Error(ErrorKind::SchemaMismatch, "line " + std::to_string(line + 1) + " has " + std::to_string(f.size()) +
                                                 " fields, expected " + std::to_string(columns.size()));
    }
    std::size_t k = 0;
    auto next_double = [&] {
      const std::size_t c = k++;
      return parse_double(f[c], columns[c], line + 1);
    };

    Run r;
    r.id = parse_int<std::uint64_t>(f[k], columns[k], line + 1);
    ++k;
    std::array<double, ControlParams::kCount> x{};
    for (auto& v : x) v = next_double();
    r.params = ControlParams::from_array(x);

    auto& res = r.result;
    bool has_points = true;
    for (auto& p : res.points) {
      p.pressure = next_double();
      p.enthalpy = next_double();
      p.temperature = next_double();
      has_points = has_points && std::isfinite(p.pressure) && std::isfinite(p.enthalpy);
    }
    res.m_dot = next_double();
    res.cop = next_double();
    res.w = next_double();
    res.dh_e = next_double();
    res.dh_c = next_double();
    res.t_subcooling = next_double();
    res.t_superheating = next_double();
    const std::string& valid = f[k];
    if (valid != "0" && valid != "1") {
      throw Error(ErrorKind::SchemaMismatch, "column 'valid' line " + std::to_string(line + 1) + ": expected 0 or 1");
    }
    res.valid = valid == "1";
    ++k;
    res.reason = f[k++];
    try {
      r.provenance = provenance_from_string(f[k]);
    } catch (const Error&) {
      throw Error(ErrorKind::SchemaMismatch, "column 'provenance' line " + std::to_string(line + 1) + ": '" + f[k] + "'");
    }
    ++k;
    r.iteration = parse_int<int>(f[k], columns[k], line + 1);

    // Derived state properties are recomputed from (P, h); the stored
    // temperature is kept as written.
    if (has_points) {
      try {
        for (auto& p : res.points) {
          const double t = p.temperature;
          p = model.state_from_ph(model.isobar(p.pressure), p.enthalpy);
          p.temperature = t;
        }
      } catch (const Error& e) {
        throw Error(ErrorKind::SchemaMismatch, "line " + std::to_string(line + 1) + ": point outside property range (" +
                                                   e.what() + ")");
      }
    } else {
      for (auto& p : res.points) p.entropy = p.density = std::numeric_limits<double>::quiet_NaN();
    }
    res.status = res.valid ? SimStatus::ok : (has_points ? SimStatus::infeasible : SimStatus::no_convergence);
    runs.push_back(std::move(r));
  }
  return runs;
}

}  // namespace idoe
