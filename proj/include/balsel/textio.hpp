#pragma once

// Plain-text formats shared by the CLI and the tests.
//
// Matrix:  "matrix <rows> <cols> <real|complex>" then row-major entries,
//          complex entries written "re,im". '#' starts a comment.
// Model:   optional "model continuous|discrete" line, then A, B, C blocks.
// Config:  flat key=value lines.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "balsel/statespace.hpp"

namespace balsel {

Matrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);

Matrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);

StateSpaceModel read_model(std::istream& in);
void write_model(std::ostream& out, const StateSpaceModel& m);

StateSpaceModel read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const StateSpaceModel& m);

using KeyValues = std::map<std::string, std::string>;

/// Throws ParseError on a line without '=' or a duplicate key.
KeyValues read_key_values(std::istream& in);
KeyValues read_key_values_file(const std::filesystem::path& path);

/// Shortest round-trip text for a double (17 significant digits).
std::string format_real(double v);

/// Minimal CSV writer: header on construction, one call per row.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);
    CsvWriter& cell(const std::string& s);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(Index v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    void end_row();

private:
    std::ostream& out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Parses "a,b,c" into numbers; throws ParseError on junk.
std::vector<double> parse_number_list(const std::string& s);

/// Parses "re" or "re,im".
Complex parse_complex(const std::string& s);

}  // namespace balsel
