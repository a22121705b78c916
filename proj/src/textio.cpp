#include "balsel/textio.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace balsel {

namespace {

struct Token {
    std::string text;
    std::size_t line;
};

class Tokens {
public:
    explicit Tokens(std::istream& in) {
        std::string line;
        std::size_t no = 0;
        while (std::getline(in, line)) {
            ++no;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::string t;
            while (ls >> t) toks_.push_back({t, no});
        }
    }

    bool done() const { return pos_ >= toks_.size(); }
    const Token& peek() const {
        if (done()) throw ParseError("unexpected end of input");
        return toks_[pos_];
    }
    const Token& next() {
        const Token& t = peek();
        ++pos_;
        return t;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

[[noreturn]] void fail(const Token& t, const std::string& what) {
    throw ParseError("line " + std::to_string(t.line) + ": " + what + " (got '" + t.text + "')");
}

double to_double(const std::string& s, bool& ok) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    const auto r = std::from_chars(b, e, v);
    ok = r.ec == std::errc() && r.ptr == e;
    return v;
}

Index to_index(const Token& t) {
    long long v = 0;
    const auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (r.ec != std::errc() || r.ptr != t.text.data() + t.text.size() || v < 0) fail(t, "expected a dimension");
    return static_cast<Index>(v);
}

Matrix parse_matrix(Tokens& tk) {
    const Token& head = tk.next();
    if (head.text != "matrix") fail(head, "expected 'matrix' header");
    const Index rows = to_index(tk.next());
    const Index cols = to_index(tk.next());
    const Token& kind = tk.next();
    const bool is_complex = kind.text == "complex";
    if (!is_complex && kind.text != "real") fail(kind, "expected 'real' or 'complex'");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
            if (tk.done()) throw ParseError("matrix ended after " + std::to_string(i * cols + j) + " of " +
                                            std::to_string(rows * cols) + " entries");
            const Token& t = tk.next();
            bool ok = false;
            if (is_complex) {
                const auto comma = t.text.find(',');
                if (comma == std::string::npos) fail(t, "expected 're,im'");
                bool ok2 = false;
                const double re = to_double(t.text.substr(0, comma), ok);
                const double im = to_double(t.text.substr(comma + 1), ok2);
                if (!ok || !ok2) fail(t, "bad complex entry");
                m(i, j) = Complex(re, im);
            } else {
                const double v = to_double(t.text, ok);
                if (!ok) fail(t, "bad real entry");
                m(i, j) = v;
            }
        }
    return m;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path.string());
    return f;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw DomainError("cannot write " + path.string());
    return f;
}

}  // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Matrix read_matrix(std::istream& in) {
    Tokens tk(in);
    Matrix m = parse_matrix(tk);
    if (!tk.done()) fail(tk.peek(), "trailing data after matrix");
    return m;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    const bool is_complex = field_of(m) == Field::complex;
    out << "matrix " << m.rows() << ' ' << m.cols() << (is_complex ? " complex\n" : " real\n");
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << format_real(m(i, j).real());
            if (is_complex) out << ',' << format_real(m(i, j).imag());
        }
        out << '\n';
    }
}

Matrix read_matrix_file(const std::filesystem::path& path) {
    auto f = open_in(path);
    return read_matrix(f);
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m) {
    auto f = open_out(path);
    write_matrix(f, m);
}

StateSpaceModel read_model(std::istream& in) {
    Tokens tk(in);
    TimeDomain domain = TimeDomain::continuous;
    if (!tk.done() && tk.peek().text == "model") {
        tk.next();
        const Token& d = tk.next();
        if (d.text == "discrete")
            domain = TimeDomain::discrete;
        else if (d.text != "continuous")
            fail(d, "expected 'continuous' or 'discrete'");
    }
    Matrix a = parse_matrix(tk);
    Matrix b = parse_matrix(tk);
    Matrix c = parse_matrix(tk);
    if (!tk.done()) fail(tk.peek(), "trailing data after model");
    try {
        return StateSpaceModel(std::move(a), std::move(b), std::move(c), domain);
    } catch (const DimensionError& e) {
        throw ParseError(std::string("model blocks are inconsistent: ") + e.what());
    }
}

void write_model(std::ostream& out, const StateSpaceModel& m) {
    out << "model " << (m.time_domain() == TimeDomain::discrete ? "discrete" : "continuous") << '\n';
    write_matrix(out, m.a());
    write_matrix(out, m.b());
    write_matrix(out, m.c());
}

StateSpaceModel read_model_file(const std::filesystem::path& path) {
    auto f = open_in(path);
    return read_model(f);
}

void write_model_file(const std::filesystem::path& path, const StateSpaceModel& m) {
    auto f = open_out(path);
    write_model(f, m);
}

KeyValues read_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(no) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("line " + std::to_string(no) + ": empty key");
        if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
            throw ParseError("line " + std::to_string(no) + ": duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues read_key_values_file(const std::filesystem::path& path) {
    auto f = open_in(path);
    return read_key_values(f);
}

std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const std::string piece = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        bool ok = false;
        const double v = to_double(piece, ok);
        if (!ok) throw ParseError("bad number '" + piece + "' in list '" + s + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

Complex parse_complex(const std::string& s) {
    const auto v = parse_number_list(s);
    if (v.size() == 1) return {v[0], 0.0};
    if (v.size() == 2) return {v[0], v[1]};
    throw ParseError("expected 're' or 're,im', got '" + s + "'");
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& s) {
    out_ << (filled_++ ? "," : "") << s;
    return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_real(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
    if (filled_ != columns_)
        throw DimensionError("CsvWriter: row has " + std::to_string(filled_) + " cells, header has " +
                             std::to_string(columns_));
    out_ << '\n';
    filled_ = 0;
}

}  // namespace balsel
