#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace crqkit {

// Panel variables, in canonical column order.
enum class Var { IR, EQ, MG, EPS, CEOt, REV, Earn, Eprof, MCap, TSR };

inline constexpr std::array<Var, 10> kAllVars = {
    Var::IR, Var::EQ, Var::MG, Var::EPS, Var::CEOt,
    Var::REV, Var::Earn, Var::Eprof, Var::MCap, Var::TSR};
inline constexpr std::array<Var, 4> kExplanatoryRatios = {Var::IR, Var::EQ, Var::MG, Var::EPS};
inline constexpr std::array<Var, 5> kResponseVars = {Var::REV, Var::Earn, Var::Eprof,
                                                     Var::MCap, Var::TSR};

const char* var_name(Var v);

struct PanelRecord {
  double values[10] = {};  // indexed by Var

  double& operator[](Var v) { return values[static_cast<std::size_t>(v)]; }
  double operator[](Var v) const { return values[static_cast<std::size_t>(v)]; }
};

// Validated company-year panel. Every company covers the identical
// contiguous year range; companies keep their first-appearance order.
struct PanelDataset {
  std::vector<std::string> company_ids;
  std::vector<std::string> industries;  // one label per company
  int first_year = 0;
  int last_year = 0;
  std::vector<std::vector<PanelRecord>> records;  // [company][year - first_year]

  int num_companies() const { return static_cast<int>(company_ids.size()); }
  int num_years() const { return last_year - first_year + 1; }
  bool covers(int year) const { return year >= first_year && year <= last_year; }

  const PanelRecord& at(int company, int year) const {
    return records[static_cast<std::size_t>(company)][static_cast<std::size_t>(year - first_year)];
  }
  double value(int company, int year, Var v) const { return at(company, year)[v]; }

  std::vector<std::string> distinct_industries() const;  // sorted, deduplicated
};

struct SchemaConfig {
  int max_industries = 6;
};

// Loads and fully validates a panel CSV. Any defect raises a located error;
// there is no partially loaded state.
PanelDataset load_panel(const std::string& path, const SchemaConfig& config = {});
PanelDataset parse_panel_csv(std::istream& in, const std::string& source_name,
                             const SchemaConfig& config = {});

// Sub-panel restricted to [start_year, end_year]; company set unchanged.
PanelDataset window(const PanelDataset& panel, int start_year, int end_year);

// Canonical serialization: companies sorted by id, years ascending, shortest
// round-trip number formatting, LF line endings.
void write_panel_csv(const PanelDataset& panel, std::ostream& out);
std::string panel_to_csv(const PanelDataset& panel);

// JSON export of the validated panel, for debugging.
std::string panel_to_json(const PanelDataset& panel);

}  // namespace crqkit
