#pragma once
// Deterministic report formatting: 17 significant digits, '.' decimal point,
// no locale, byte-stable field order.  JSON is emitted by a minimal writer
// rather than a serialization library so the byte layout is pinned.

#include <complex>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace cartan {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_int(long x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%ld", x);
  return buf;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

// Nested-object JSON writer with explicit key order and pinned indentation.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& os) : os_(os) {}

  void begin_object() {
    comma();
    os_ << '{';
    stack_.push_back(0);
  }
  void end_object() {
    stack_.pop_back();
    nl();
    os_ << '}';
    if (!stack_.empty()) ++stack_.back();
  }
  void begin_array() {
    comma();
    os_ << '[';
    stack_.push_back(0);
  }
  void end_array() {
    stack_.pop_back();
    nl();
    os_ << ']';
    if (!stack_.empty()) ++stack_.back();
  }
  void key(const std::string& k) {
    comma();
    os_ << '"' << escaped(k) << "\": ";
    pending_value_ = true;
  }
  void value_string(const std::string& v) {
    comma();
    os_ << '"' << escaped(v) << '"';
    ++stack_.back();
  }
  void value_number(double v) {
    comma();
    os_ << fmt17(v);
    ++stack_.back();
  }
  void value_int(long v) {
    comma();
    os_ << fmt_int(v);
    ++stack_.back();
  }
  void value_bool(bool v) {
    comma();
    os_ << (v ? "true" : "false");
    ++stack_.back();
  }
  void value_complex(const std::complex<double>& v) {
    begin_object();
    key("re");
    value_number(v.real());
    key("im");
    value_number(v.imag());
    end_object();
  }
  void finish() { os_ << '\n'; }

 private:
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (stack_.empty()) return;
    if (stack_.back() > 0) os_ << ',';
    nl_indent();
  }
  void nl() {
    os_ << '\n' << std::string(2 * (stack_.size()), ' ');
  }
  void nl_indent() {
    os_ << '\n' << std::string(2 * (stack_.size()), ' ');
  }
  static std::string escaped(const std::string& s) {
    std::string out;
    for (char ch : s) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out;
  }
  std::ostream& os_;
  std::vector<int> stack_;
  bool pending_value_ = false;
};

}  // namespace cartan
