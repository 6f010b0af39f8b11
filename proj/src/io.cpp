#include "exlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace exlab {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_value(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_value(const std::string& field, const std::string& origin) {
  std::string t = trim(field);
  if (t == "+inf" || t == "inf") return kInf;
  if (t == "-inf") return -kInf;
  if (t.empty()) throw std::runtime_error(origin + ": empty numeric field");
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw std::runtime_error(origin + ": not a number: '" + t + "'");
  return v;
}

std::string format_row(const std::vector<double>& vals) {
  std::string out;
  for (size_t i = 0; i < vals.size(); ++i) {
    if (i) out += ",";
    out += format_value(vals[i]);
  }
  return out;
}

std::vector<std::vector<double>> parse_rows(const std::string& text, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) row.push_back(parse_value(tok, origin + ":" + std::to_string(ln)));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

Channel preset_w1() { return bsc(0.01); }

Channel preset_w2() {
  return Channel(Matrix(2, 2, {0.6, 0.4, 0.01, 0.99}));
}

bool is_channel_preset(const std::string& spec) {
  return spec == "w1" || spec == "w2" || spec.rfind("bsc:", 0) == 0;
}

Channel load_channel(const std::string& spec) {
  if (spec == "w1") return preset_w1();
  if (spec == "w2") return preset_w2();
  if (spec.rfind("bsc:", 0) == 0) {
    double p = parse_value(spec.substr(4), "channel spec '" + spec + "'");
    return bsc(p);
  }
  auto rows = parse_rows(read_text_file(spec), spec);
  if (rows.empty()) throw std::runtime_error(spec + ": no matrix rows found");
  size_t cols = rows[0].size();
  std::vector<double> flat;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw std::runtime_error(spec + ": row " + std::to_string(i + 1) + " has " +
                               std::to_string(rows[i].size()) + " fields, expected " +
                               std::to_string(cols));
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return Channel(Matrix(static_cast<int>(rows.size()), static_cast<int>(cols), std::move(flat)));
}

InputDistribution load_px(const std::string& spec, int nx) {
  if (spec == "uniform") return uniform_input(nx);
  auto rows = parse_rows(read_text_file(spec), spec);
  if (rows.size() != 1)
    throw std::runtime_error(spec + ": expected one probability row, found " +
                             std::to_string(rows.size()));
  InputDistribution px(rows[0]);
  if (px.size() != nx)
    throw std::runtime_error(spec + ": " + std::to_string(px.size()) +
                             " entries, channel has " + std::to_string(nx) + " inputs");
  return px;
}

std::string csv_to_string(const CsvTable& t) {
  std::string out;
  for (const std::string& h : t.header) out += "# " + h + "\n";
  for (size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ",";
    out += t.columns[i];
  }
  out += "\n";
  for (const std::vector<double>& row : t.rows) {
    if (row.size() != t.columns.size())
      throw std::logic_error("csv row width does not match the column count");
    out += format_row(row);
    out += "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const std::string& path, const CsvTable& t) {
  write_text_file(path, csv_to_string(t));
}

CsvTable parse_csv_text(const std::string& text, const std::string& origin) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') {
      std::string h = line.substr(1);
      if (!h.empty() && h[0] == ' ') h = h.substr(1);
      t.header.push_back(h);
      continue;
    }
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    if (!saw_columns) {
      for (std::string& f : fields) t.columns.push_back(trim(f));
      saw_columns = true;
      continue;
    }
    if (fields.size() != t.columns.size())
      throw std::runtime_error(origin + ":" + std::to_string(ln) + ": " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(t.columns.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields)
      row.push_back(parse_value(f, origin + ":" + std::to_string(ln)));
    t.rows.push_back(std::move(row));
  }
  if (!saw_columns) throw std::runtime_error(origin + ": no column header row");
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv_text(read_text_file(path), path); }

std::string plot_script(const std::string& csv_name, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel, int xcol,
                        const std::vector<std::pair<int, std::string>>& series) {
  std::string out;
  out += "set datafile separator ','\n";
  out += "set datafile commentschars '#'\n";
  out += "set key top right\n";
  out += "set grid\n";
  out += "set title '" + title + "'\n";
  out += "set xlabel '" + xlabel + "'\n";
  out += "set ylabel '" + ylabel + "'\n";
  out += "plot ";
  for (size_t i = 0; i < series.size(); ++i) {
    if (i) out += ", \\\n     ";
    out += "'" + csv_name + "' using " + std::to_string(xcol) + ":" +
           std::to_string(series[i].first) + " with linespoints title '" + series[i].second + "'";
  }
  out += "\n";
  return out;
}

}  // namespace exlab
