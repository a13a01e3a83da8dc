#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pblab/cli.hpp"

namespace pblab::cli {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> as_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string canonical(const std::string& s) {
  if (auto v = as_number(s)) return fmt::format("{}", *v);
  return s;
}

}  // namespace

CsvTable CsvTable::parse(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header row");
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = split_line(line);
    if (row.size() != t.header.size())
      throw std::invalid_argument(fmt::format("csv: row {} has {} fields, header has {}", t.rows.size() + 1,
                                              row.size(), t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return parse(in);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      if (r[i].find_first_of(",\"\n") == std::string::npos) {
        os << r[i];
        continue;
      }
      os << '"';
      for (char c : r[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
      os << '"';
    }
    os << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return os.str();
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::invalid_argument("csv: no column '" + name + "'");
}

nlohmann::json DiffReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells)
    arr.push_back({{"row", c.row_key}, {"column", c.column}, {"produced", c.produced}, {"golden", c.golden},
                   {"abs_dev", c.abs_dev}, {"rel_dev", c.rel_dev}, {"pass", c.pass}, {"hard", c.hard}});
  return {{"pass", pass()}, {"failures", failures}, {"hard_failures", hard_failures}, {"cells", arr}};
}

DiffReport diff_tables(const CsvTable& produced, const CsvTable& golden, const DiffOptions& opts) {
  if (opts.keys.empty()) throw std::invalid_argument("diff: no key columns");
  for (const auto& col : golden.header) {
    try {
      produced.column(col);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("diff: schema mismatch, produced table lacks column '" + col + "'");
    }
  }
  std::vector<std::size_t> gk, pk;
  for (const auto& k : opts.keys) {
    gk.push_back(golden.column(k));
    pk.push_back(produced.column(k));
  }
  auto key_of = [](const std::vector<std::string>& row, const std::vector<std::size_t>& idx) {
    std::string key;
    for (std::size_t i = 0; i < idx.size(); ++i) key += (i ? "|" : "") + canonical(row[idx[i]]);
    return key;
  };
  std::map<std::string, const std::vector<std::string>*> by_key;
  for (const auto& row : produced.rows) by_key[key_of(row, pk)] = &row;

  DiffReport rep;
  auto record = [&](CellDiff d) {
    if (!d.pass) {
      ++rep.failures;
      if (d.hard) ++rep.hard_failures;
    }
    rep.cells.push_back(std::move(d));
  };
  for (const auto& grow : golden.rows) {
    const std::string key = key_of(grow, gk);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      record({key, "(row)", "", "present", 0.0, 0.0, false, true});
      continue;
    }
    const auto& prow = *it->second;
    for (std::size_t c = 0; c < golden.header.size(); ++c) {
      const std::string& col = golden.header[c];
      if (std::find(opts.keys.begin(), opts.keys.end(), col) != opts.keys.end()) continue;
      const std::string& g = grow[c];
      if (g.empty()) continue;  // golden cell not stated
      const std::string& p = prow[produced.column(col)];
      CellDiff d{key, col, p, g};
      const auto gv = as_number(g), pv = as_number(p);
      if (opts.integer_columns.count(col)) {
        d.hard = true;
        d.pass = gv && pv ? *gv == *pv : g == p;
        if (gv && pv) d.abs_dev = std::fabs(*pv - *gv);
      } else if (gv && pv) {
        d.abs_dev = std::fabs(*pv - *gv);
        d.rel_dev = *gv != 0.0 ? d.abs_dev / std::fabs(*gv) : (d.abs_dev == 0.0 ? 0.0 : INFINITY);
        const double at = opts.abs_tol.count(col) ? opts.abs_tol.at(col) : opts.default_abs_tol;
        const bool abs_ok = d.abs_dev <= at;
        const bool rel_ok = opts.rel_tol.count(col) && d.rel_dev <= opts.rel_tol.at(col);
        d.pass = abs_ok || rel_ok;
      } else {
        d.pass = g == p;
      }
      record(std::move(d));
    }
  }
  return rep;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace pblab::cli
