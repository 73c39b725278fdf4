#include "common.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

namespace acceptance {

void Report::note(const std::string& text) { std::cout << "    " << text << std::endl; }

void Report::criterion(const std::string& id, const std::string& title, bool pass,
                       const std::string& detail) {
  if (!pass) ++failures_;
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << title;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
}

std::string fmt(double v, int digits) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

RunConfig make_config(const std::string& dataset_json, const std::string& extra_json) {
  std::string text = "{\"dataset\": " + dataset_json;
  if (!extra_json.empty()) text += ", " + extra_json;
  text += "}";
  return parse_run_config(text);
}

}  // namespace acceptance
