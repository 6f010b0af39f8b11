#pragma once

#include <string>
#include <utility>
#include <vector>

#include "exlab/typespace.hpp"

namespace exlab {

// Stamped into every CSV header so an output file names the build that made it.
inline constexpr const char* kToolVersion = "exlab 0.3.0";

// Doubles print as %.17g so a re-read reproduces the bit pattern; infinities
// print as "+inf"/"-inf".
std::string format_value(double v);
double parse_value(const std::string& field, const std::string& origin);
std::string format_row(const std::vector<double>& vals);  // comma joined

// Whitespace-separated numeric rows, '#' starts a comment, blank lines
// skipped. origin labels diagnostics ("file.txt:3: ...").
std::vector<std::vector<double>> parse_rows(const std::string& text, const std::string& origin);

Channel preset_w1();  // binary symmetric, crossover 0.01
Channel preset_w2();  // binary asymmetric, rows (0.6 0.4) and (0.01 0.99)

// "w1", "w2", "bsc:<p>", or a path to a matrix file.
Channel load_channel(const std::string& spec);
// "uniform" (needs nx) or a path to a one-row file.
InputDistribution load_px(const std::string& spec, int nx);
bool is_channel_preset(const std::string& spec);

// CSV with '#'-prefixed header lines, then a column-name row, then data.
struct CsvTable {
  std::vector<std::string> header;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string csv_to_string(const CsvTable& t);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void write_csv(const std::string& path, const CsvTable& t);
CsvTable parse_csv_text(const std::string& text, const std::string& origin);
CsvTable read_csv(const std::string& path);

// gnuplot command file plotting csv columns (1-based index, label) against
// column xcol. Pure function of its arguments, so regeneration is
// byte-identical.
std::string plot_script(const std::string& csv_name, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel, int xcol,
                        const std::vector<std::pair<int, std::string>>& series);

}  // namespace exlab
