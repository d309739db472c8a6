#include "crqkit/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "crqkit/errors.hpp"
#include "crqkit/textio.hpp"

namespace crqkit {

namespace {

constexpr const char* kVarNames[10] = {"IR",  "EQ",   "MG",    "EPS",  "CEOt",
                                       "REV", "Earn", "Eprof", "MCap", "TSR"};

const std::string kHeader =
    "company_id,year,industry,IR,EQ,MG,EPS,CEOt,REV,Earn,Eprof,MCap,TSR";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_number(const std::string& field, const std::string& source, int line_no,
                    const char* column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(source + ":" + std::to_string(line_no) + ": column " + column +
                     ": cannot parse '" + field + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw ParseError(source + ":" + std::to_string(line_no) + ": column " + column +
                     ": value '" + field + "' is not finite");
  }
  return value;
}

int parse_year(const std::string& field, const std::string& source, int line_no) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(source + ":" + std::to_string(line_no) + ": column year: cannot parse '" +
                     field + "' as a year");
  }
  return value;
}

}  // namespace

const char* var_name(Var v) { return kVarNames[static_cast<std::size_t>(v)]; }

std::vector<std::string> PanelDataset::distinct_industries() const {
  std::vector<std::string> labels = industries;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

PanelDataset parse_panel_csv(std::istream& in, const std::string& source_name,
                             const SchemaConfig& config) {
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) {
    throw SchemaError(source_name + ": empty file, expected header '" + kHeader + "'");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw SchemaError(source_name + ": header mismatch, expected '" + kHeader + "', got '" +
                      line + "'");
  }

  struct CompanyRows {
    std::string industry;
    std::map<int, PanelRecord> by_year;
  };
  std::vector<std::string> order;
  std::map<std::string, CompanyRows> companies;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 13) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": expected 13 fields, got " +
                       std::to_string(f.size()));
    }
    const std::string& id = f[0];
    if (id.empty()) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": empty company_id");
    }
    const int year = parse_year(f[1], source_name, line_no);
    const std::string& industry = f[2];
    if (industry.empty()) {
      throw SchemaError(source_name + ":" + std::to_string(line_no) + ": empty industry label");
    }

    PanelRecord rec;
    for (std::size_t v = 0; v < 10; ++v) {
      rec.values[v] = parse_number(f[3 + v], source_name, static_cast<int>(line_no), kVarNames[v]);
    }

    auto it = companies.find(id);
    if (it == companies.end()) {
      order.push_back(id);
      it = companies.emplace(id, CompanyRows{industry, {}}).first;
    } else if (it->second.industry != industry) {
      throw IntegrityError(source_name + ":" + std::to_string(line_no) + ": company '" + id +
                           "' changes industry from '" + it->second.industry + "' to '" +
                           industry + "'");
    }
    if (!it->second.by_year.emplace(year, rec).second) {
      throw IntegrityError(source_name + ":" + std::to_string(line_no) + ": duplicate record for (" +
                           id + ", " + std::to_string(year) + ")");
    }
  }

  if (order.empty()) {
    throw SchemaError(source_name + ": no data rows");
  }

  // Every company must cover the identical contiguous year range.
  const auto& first_company = companies.at(order.front());
  const int first_year = first_company.by_year.begin()->first;
  const int last_year = first_company.by_year.rbegin()->first;
  PanelDataset panel;
  panel.first_year = first_year;
  panel.last_year = last_year;
  for (const std::string& id : order) {
    const CompanyRows& rows = companies.at(id);
    const int lo = rows.by_year.begin()->first;
    const int hi = rows.by_year.rbegin()->first;
    if (lo != first_year || hi != last_year) {
      throw CoverageError(source_name + ": company '" + id + "' covers " + std::to_string(lo) +
                          "-" + std::to_string(hi) + " but company '" + order.front() +
                          "' covers " + std::to_string(first_year) + "-" +
                          std::to_string(last_year));
    }
    std::vector<PanelRecord> series;
    series.reserve(static_cast<std::size_t>(last_year - first_year + 1));
    for (int year = first_year; year <= last_year; ++year) {
      auto it = rows.by_year.find(year);
      if (it == rows.by_year.end()) {
        throw CoverageError(source_name + ": company '" + id + "' is missing year " +
                            std::to_string(year));
      }
      series.push_back(it->second);
    }
    panel.company_ids.push_back(id);
    panel.industries.push_back(rows.industry);
    panel.records.push_back(std::move(series));
  }

  const std::vector<std::string> labels = panel.distinct_industries();
  if (static_cast<int>(labels.size()) > config.max_industries) {
    throw SchemaError(source_name + ": " + std::to_string(labels.size()) +
                      " industry labels exceed the configured maximum of " +
                      std::to_string(config.max_industries));
  }
  return panel;
}

PanelDataset load_panel(const std::string& path, const SchemaConfig& config) {
  std::ifstream in(path);
  if (!in) throw CoverageError("cannot open panel file '" + path + "'");
  return parse_panel_csv(in, path, config);
}

PanelDataset window(const PanelDataset& panel, int start_year, int end_year) {
  if (start_year > end_year) throw DomainError("window start year exceeds end year");
  if (start_year < panel.first_year || end_year > panel.last_year) {
    throw CoverageError("window " + std::to_string(start_year) + "-" + std::to_string(end_year) +
                        " outside panel coverage " + std::to_string(panel.first_year) + "-" +
                        std::to_string(panel.last_year));
  }
  PanelDataset out;
  out.company_ids = panel.company_ids;
  out.industries = panel.industries;
  out.first_year = start_year;
  out.last_year = end_year;
  out.records.reserve(panel.records.size());
  for (const auto& series : panel.records) {
    const auto begin = series.begin() + (start_year - panel.first_year);
    out.records.emplace_back(begin, begin + (end_year - start_year + 1));
  }
  return out;
}

void write_panel_csv(const PanelDataset& panel, std::ostream& out) {
  out << kHeader << "\n";
  std::vector<int> order(static_cast<std::size_t>(panel.num_companies()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return panel.company_ids[static_cast<std::size_t>(a)] <
           panel.company_ids[static_cast<std::size_t>(b)];
  });
  for (int c : order) {
    for (int year = panel.first_year; year <= panel.last_year; ++year) {
      const PanelRecord& rec = panel.at(c, year);
      out << panel.company_ids[static_cast<std::size_t>(c)] << ',' << year << ','
          << panel.industries[static_cast<std::size_t>(c)];
      for (double v : rec.values) out << ',' << format_double(v);
      out << "\n";
    }
  }
}

std::string panel_to_csv(const PanelDataset& panel) {
  std::ostringstream out;
  write_panel_csv(panel, out);
  return out.str();
}

std::string panel_to_json(const PanelDataset& panel) {
  nlohmann::ordered_json root;
  root["first_year"] = panel.first_year;
  root["last_year"] = panel.last_year;
  nlohmann::ordered_json companies = nlohmann::ordered_json::array();
  for (int c = 0; c < panel.num_companies(); ++c) {
    nlohmann::ordered_json company;
    company["company_id"] = panel.company_ids[static_cast<std::size_t>(c)];
    company["industry"] = panel.industries[static_cast<std::size_t>(c)];
    nlohmann::ordered_json years = nlohmann::ordered_json::array();
    for (int year = panel.first_year; year <= panel.last_year; ++year) {
      nlohmann::ordered_json row;
      row["year"] = year;
      const PanelRecord& rec = panel.at(c, year);
      for (std::size_t v = 0; v < 10; ++v) row[kVarNames[v]] = rec.values[v];
      years.push_back(std::move(row));
    }
    company["years"] = std::move(years);
    companies.push_back(std::move(company));
  }
  root["companies"] = std::move(companies);
  return root.dump(2);
}

}  // namespace crqkit
