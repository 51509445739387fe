#pragma once

// Command-line front end: matrix text files, deterministic JSON reports and
// the factor / verify / analyze / canonical commands.
//
// Matrix files: '#' lines and blank lines are ignored; the first data line
// is "ROWS COLS", followed by ROWS lines of COLS tokens "re" or "re,im".

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "symfact/matcore.hpp"

namespace symfact::cli {

/// Malformed matrix text; line and column are 1-based.
class ParseError : public ValidationError {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

Matrix parse_matrix(std::string_view text);
/// "ROWS COLS" header, then "re,im" tokens with 17 significant digits.
std::string format_matrix(const Matrix& m);

std::string sha256_hex(std::string_view bytes);

using Json = nlohmann::json;

/// Sorted keys, two-space indentation, floats as %.17g, non-finite as null.
std::string dump_json(const Json& j);
/// One "path: value" line per leaf, in sorted key order.
std::string dump_text(const Json& j);

Json to_json(Complex z);
Json to_json(const Matrix& m);

enum class Format { Json, Text };

struct Options {
  ToleranceConfig cfg;
  Format format = Format::Json;
  bool oracle = false;
  bool selfadjoint = false;
  std::optional<std::string> emit_v;
};

/// Exit codes: 0 contract passed, 1 input or usage error, 2 numerical failure.
enum ExitCode : int { kPass = 0, kInputError = 1, kNumericalFailure = 2 };

struct Report {
  Json body;  ///< {"command", "input_sha256", "config", "result", "status"}
  int exit_code = kPass;
};

Report cmd_factor(const std::string& path, const Options& opt);
Report cmd_verify(const std::string& path_c, const std::string& path_v, const Options& opt);
Report cmd_analyze(const std::string& path, const Options& opt);
Report cmd_canonical(const std::string& path, const Options& opt);

/// Runs `command` over every path concurrently; reports keep argument order.
std::vector<Report> run_batch(std::string_view command, const std::vector<std::string>& paths,
                              const Options& opt);

/// Serializes reports (a single object, or an array for several) and
/// returns the combined exit code (the largest one).
int render(const std::vector<Report>& reports, Format format, std::string& out);

/// Entry point shared by the executable and the end-to-end tests.
int run_cli(int argc, const char* const* argv, std::string& out, std::string& err);

}  // namespace symfact::cli
