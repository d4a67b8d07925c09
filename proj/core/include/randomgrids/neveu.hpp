#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgrids {

// Node address in a rooted ordered tree: the sequence of child indices
// (1-based) walked down from the root. The root is the empty sequence.
struct NeveuWord {
  std::vector<int> digits;

  NeveuWord() = default;
  explicit NeveuWord(std::vector<int> d) : digits(std::move(d)) {}

  bool is_root() const { return digits.empty(); }
  int length() const { return static_cast<int>(digits.size()); }

  NeveuWord parent() const {
    if (is_root()) throw std::logic_error("NeveuWord: root has no parent");
    NeveuWord p{digits};
    p.digits.pop_back();
    return p;
  }

  NeveuWord child(int i) const {
    NeveuWord c{digits};
    c.digits.push_back(i);
    return c;
  }

  // i . u : the address of u inside subtree i, seen from one level up.
  NeveuWord prefixed(int i) const {
    NeveuWord c;
    c.digits.reserve(digits.size() + 1);
    c.digits.push_back(i);
    c.digits.insert(c.digits.end(), digits.begin(), digits.end());
    return c;
  }

  bool has_prefix(const NeveuWord& p) const {
    if (p.digits.size() > digits.size()) return false;
    return std::equal(p.digits.begin(), p.digits.end(), digits.begin());
  }

  // Drops the first digit (u -> v where u = i.v).
  NeveuWord tail() const {
    if (is_root()) throw std::logic_error("NeveuWord: root has no tail");
    return NeveuWord{std::vector<int>(digits.begin() + 1, digits.end())};
  }

  // Lexicographic order with a proper prefix before its extensions; this is
  // the order used everywhere a deterministic node enumeration is needed.
  auto operator<=>(const NeveuWord&) const = default;

  // "∅" for the root, concatenated digits otherwise. Digits above 9 cannot be
  // concatenated unambiguously, so they are dot-separated ("10.1"); supported
  // scheme orders keep branching single-digit, the fallback is for safety.
  std::string to_string() const {
    if (is_root()) return "∅";
    bool wide = false;
    for (int d : digits)
      if (d > 9) wide = true;
    std::string out;
    for (size_t k = 0; k < digits.size(); ++k) {
      if (wide && k) out += '.';
      out += std::to_string(digits[k]);
    }
    return out;
  }

  static NeveuWord parse(const std::string& s) {
    if (s == "∅" || s.empty()) return NeveuWord{};
    NeveuWord w;
    if (s.find('.') != std::string::npos) {
      size_t pos = 0;
      while (pos < s.size()) {
        size_t dot = s.find('.', pos);
        if (dot == std::string::npos) dot = s.size();
        w.digits.push_back(std::stoi(s.substr(pos, dot - pos)));
        pos = dot + 1;
      }
    } else {
      for (char c : s) {
        if (c < '1' || c > '9') throw std::invalid_argument("NeveuWord: bad digit in '" + s + "'");
        w.digits.push_back(c - '0');
      }
    }
    for (int d : w.digits)
      if (d < 1) throw std::invalid_argument("NeveuWord: child indices are 1-based");
    return w;
  }
};

}  // namespace rgrids
