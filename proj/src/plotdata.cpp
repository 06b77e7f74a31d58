#include "capa/plotdata.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "capa/sweep.hpp"

namespace capa {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

struct Series {
  std::string name;
  bool has_err = false;
  std::map<std::string, std::pair<std::string, std::string>> cells;  // value text -> (result, std_err)
};

struct Table {
  std::string metric, axis;
  std::vector<std::pair<double, std::string>> values;  // numeric key and the text as written
  std::vector<Series> series;
};

}  // namespace

std::vector<std::string> emit_plotdata(const std::string& csv_path, const std::string& outdir) {
  std::ifstream in(csv_path);
  if (!in) throw PlotDataError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw PlotDataError(csv_path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw PlotDataError(csv_path + ": unexpected header");

  std::vector<Table> tables;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) throw PlotDataError(csv_path + ":" + std::to_string(lineno) + ": expected 9 fields");
    const std::string& axis = f[0];
    const std::string& value = f[1];
    const std::string& metric = f[4];
    double key = 0.0;
    try {
      std::size_t used = 0;
      key = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw PlotDataError(csv_path + ":" + std::to_string(lineno) + ": value is not a number");
    }
    if (axis.empty() || metric.empty() || f[2].empty() || f[3].empty())
      throw PlotDataError(csv_path + ":" + std::to_string(lineno) + ": missing axis, scenario, evaluator or metric");

    auto t = std::find_if(tables.begin(), tables.end(), [&](const Table& x) { return x.metric == metric && x.axis == axis; });
    if (t == tables.end()) {
      tables.push_back({metric, axis, {}, {}});
      t = std::prev(tables.end());
    }
    if (std::none_of(t->values.begin(), t->values.end(), [&](const auto& v) { return v.second == value; }))
      t->values.emplace_back(key, value);
    const std::string name = f[2] + ":" + f[3];
    auto s = std::find_if(t->series.begin(), t->series.end(), [&](const Series& x) { return x.name == name; });
    if (s == t->series.end()) {
      t->series.push_back({name, false, {}});
      s = std::prev(t->series.end());
    }
    const std::string result = f[5].rfind("error:", 0) == 0 ? std::string() : f[5];
    if (!f[6].empty()) s->has_err = true;
    s->cells[value] = {result, f[6]};
  }

  std::filesystem::create_directories(outdir);
  std::vector<std::string> written;
  for (auto& t : tables) {
    std::stable_sort(t.values.begin(), t.values.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::string path = (std::filesystem::path(outdir) / (t.metric + "_" + t.axis + ".csv")).string();
    std::ostringstream os;
    os << "value";
    for (const auto& s : t.series) {
      os << ',' << s.name;
      if (s.has_err) os << ',' << s.name << ":std_err";
    }
    os << '\n';
    for (const auto& [k, text] : t.values) {
      os << text;
      for (const auto& s : t.series) {
        auto it = s.cells.find(text);
        os << ',' << (it == s.cells.end() ? std::string() : it->second.first);
        if (s.has_err) os << ',' << (it == s.cells.end() ? std::string() : it->second.second);
      }
      os << '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << os.str();
    written.push_back(path);
  }
  return written;
}

}  // namespace capa
