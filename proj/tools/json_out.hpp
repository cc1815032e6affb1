#pragma once

// Deterministic JSON emission for report files: keys appear exactly in the
// order they are written, floats use %.17g so identical doubles yield
// identical bytes, complex numbers flatten to inline [re, im] pairs, and the
// two-space indentation keeps reports diff-able.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmq/common.hpp"

namespace cmqtool {

std::string format_double(double d);

class JsonWriter {
 public:
  void begin_object();
  void end_object();
  void begin_array();
  void end_array();

  void key(std::string_view k);

  void value(std::string_view s);
  void value(const char* s) { value(std::string_view(s)); }
  void value(bool b);
  void value(double d);
  void value(long long i);
  void value(unsigned long long i);
  void value(int i) { value(static_cast<long long>(i)); }
  void value(std::size_t i) { value(static_cast<unsigned long long>(i)); }
  void value(cmq::Cplx z);

  /// Inline numeric array, kept on one line (points, coefficient pairs).
  void value(std::span<const double> xs);
  void value(std::span<const int> xs);

  std::string take() { return std::move(out_); }

 private:
  void separator();
  void raw(std::string_view text);

  bool pending_key_ = false;
  std::vector<int> counts_;
  std::string out_;
};

}  // namespace cmqtool
