#include "json_out.hpp"

#include <cmath>
#include <cstdio>

namespace cmqtool {

std::string format_double(double d) {
  if (!std::isfinite(d)) return "null";
  if (d == 0.0) return "0";  // canonicalize the sign of zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

}  // namespace

void JsonWriter::separator() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (counts_.empty()) return;
  if (counts_.back() > 0) out_ += ',';
  out_ += '\n';
  out_.append(2 * counts_.size(), ' ');
  ++counts_.back();
}

void JsonWriter::raw(std::string_view text) {
  separator();
  out_ += text;
}

void JsonWriter::begin_object() {
  raw("{");
  counts_.push_back(0);
}

void JsonWriter::begin_array() {
  raw("[");
  counts_.push_back(0);
}

void JsonWriter::end_object() {
  int had = counts_.back();
  counts_.pop_back();
  if (had > 0) {
    out_ += '\n';
    out_.append(2 * counts_.size(), ' ');
  }
  out_ += '}';
}

void JsonWriter::end_array() {
  int had = counts_.back();
  counts_.pop_back();
  if (had > 0) {
    out_ += '\n';
    out_.append(2 * counts_.size(), ' ');
  }
  out_ += ']';
}

void JsonWriter::key(std::string_view k) {
  separator();
  out_ += escape(k);
  out_ += ": ";
  pending_key_ = true;
}

void JsonWriter::value(std::string_view s) { raw(escape(s)); }

void JsonWriter::value(bool b) { raw(b ? "true" : "false"); }

void JsonWriter::value(double d) { raw(format_double(d)); }

void JsonWriter::value(long long i) { raw(std::to_string(i)); }

void JsonWriter::value(unsigned long long i) { raw(std::to_string(i)); }

void JsonWriter::value(cmq::Cplx z) {
  raw("[" + format_double(z.real()) + ", " + format_double(z.imag()) + "]");
}

void JsonWriter::value(std::span<const double> xs) {
  std::string line = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) line += ", ";
    line += format_double(xs[i]);
  }
  line += ']';
  raw(line);
}

void JsonWriter::value(std::span<const int> xs) {
  std::string line = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) line += ", ";
    line += std::to_string(xs[i]);
  }
  line += ']';
  raw(line);
}

}  // namespace cmqtool
