#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>

#include "pers/errors.hpp"

namespace pers {

// The four binary personality dimensions. Bit 0 is the first pole letter
// (E, S, T, J), bit 1 the second (I, N, F, P).
enum class Dimension : int { EI = 0, SN = 1, TF = 2, JP = 3 };

inline constexpr std::array<Dimension, 4> kAllDimensions{Dimension::EI, Dimension::SN,
                                                         Dimension::TF, Dimension::JP};

inline const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::EI: return "EI";
    case Dimension::SN: return "SN";
    case Dimension::TF: return "TF";
    case Dimension::JP: return "JP";
  }
  return "?";
}

inline Dimension dimension_from_name(std::string_view name) {
  for (Dimension d : kAllDimensions)
    if (name == dimension_name(d)) return d;
  throw ConfigError("unknown dimension '" + std::string(name) + "'");
}

// Pole letter pairs indexed by dimension, first pole at bit 0.
inline constexpr std::array<std::array<char, 2>, 4> kPoleLetters{{
    {'E', 'I'}, {'S', 'N'}, {'T', 'F'}, {'J', 'P'}}};

struct MbtiLabel {
  // Per-dimension pole bits; 0 = E/S/T/J, 1 = I/N/F/P.
  std::array<int, 4> bits{0, 0, 0, 0};

  int bit(Dimension d) const { return bits[std::size_t(int(d))]; }
  char pole_letter(Dimension d) const { return kPoleLetters[std::size_t(int(d))][std::size_t(bit(d))]; }

  // Dense index in [0, 16): EI is the most significant bit.
  int type_index() const { return (bits[0] << 3) | (bits[1] << 2) | (bits[2] << 1) | bits[3]; }

  std::string format() const {
    std::string s(4, '?');
    for (int i = 0; i < 4; ++i) s[std::size_t(i)] = pole_letter(Dimension(i));
    return s;
  }

  friend bool operator==(const MbtiLabel&, const MbtiLabel&) = default;
};

inline MbtiLabel label_from_type_index(int index) {
  MbtiLabel label;
  label.bits = {(index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1};
  return label;
}

inline std::string type_code_for_index(int index) { return label_from_type_index(index).format(); }

// Parses a 4-letter code, case-insensitively, ignoring surrounding whitespace.
inline MbtiLabel parse_mbti_code(std::string_view code) {
  std::size_t begin = 0, end = code.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(code[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(code[end - 1]))) --end;
  const std::string_view body = code.substr(begin, end - begin);
  if (body.size() != 4) throw InvalidCode("'" + std::string(code) + "' is not a 4-letter MBTI code");
  MbtiLabel label;
  for (int i = 0; i < 4; ++i) {
    const char c = char(std::toupper(static_cast<unsigned char>(body[std::size_t(i)])));
    const auto& poles = kPoleLetters[std::size_t(i)];
    if (c == poles[0]) {
      label.bits[std::size_t(i)] = 0;
    } else if (c == poles[1]) {
      label.bits[std::size_t(i)] = 1;
    } else {
      throw InvalidCode("'" + std::string(code) + "' is not a valid MBTI code");
    }
  }
  return label;
}

inline bool is_mbti_code(std::string_view word) {
  if (word.size() != 4) return false;
  for (int i = 0; i < 4; ++i) {
    const char c = char(std::toupper(static_cast<unsigned char>(word[std::size_t(i)])));
    const auto& poles = kPoleLetters[std::size_t(i)];
    if (c != poles[0] && c != poles[1]) return false;
  }
  return true;
}

}  // namespace pers
