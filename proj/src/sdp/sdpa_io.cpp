#include "sdpsens/sdp/sdpa_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "sdpsens/error.hpp"

namespace sdpsens::sdp {

namespace {

// SDPA allows "{", "}", "(", ")" and "," as separators in the header lines.
std::string strip_punctuation(std::string s) {
  for (char& c : s) {
    if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',') c = ' ';
  }
  return s;
}

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '*' || c == '"';
  }
  return true;
}

std::size_t significant_digits(const std::string& literal) {
  std::size_t digits = 0;
  bool leading = true;
  for (char c : literal) {
    if (c == 'e' || c == 'E') break;
    if (!std::isdigit(static_cast<unsigned char>(c))) continue;
    if (leading && c == '0') continue;
    leading = false;
    ++digits;
  }
  return digits;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-comment line; false at EOF.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!is_blank_or_comment(line)) return true;
    }
    return false;
  }
  std::size_t number() const { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

}  // namespace

ReadResult read_sdpa(std::istream& in) {
  LineReader reader(in);
  std::string line;
  ReadResult result;
  SdpProblem& p = result.problem;
  const int bits = mpla::default_precision();
  const std::size_t needed = static_cast<std::size_t>(mpla::round_trip_digits(bits));
  std::size_t short_literals = 0;

  auto parse_value = [&](const std::string& tok) {
    MpScalar v;
    try {
      v = MpScalar::parse(tok);
    } catch (const Error& e) {
      throw ParseError(reader.number(), e.what());
    }
    if (significant_digits(tok) < needed) {
      // Only a loss if the decimal literal is not exactly representable.
      const MpScalar wide = MpScalar::parse(tok, bits + 64);
      if (!(wide == v)) ++short_literals;
    }
    return v;
  };

  if (!reader.next(line)) throw ParseError(reader.number(), "missing number of constraints");
  long m = 0;
  {
    std::istringstream ls(strip_punctuation(line));
    if (!(ls >> m) || m < 0) throw ParseError(reader.number(), "bad number of constraints");
  }
  if (!reader.next(line)) throw ParseError(reader.number(), "missing number of blocks");
  long nblocks = 0;
  {
    std::istringstream ls(strip_punctuation(line));
    if (!(ls >> nblocks) || nblocks <= 0) throw ParseError(reader.number(), "bad number of blocks");
  }
  if (!reader.next(line)) throw ParseError(reader.number(), "missing block structure");
  {
    std::istringstream ls(strip_punctuation(line));
    for (long i = 0; i < nblocks; ++i) {
      long d = 0;
      if (!(ls >> d) || d == 0) throw ParseError(reader.number(), "bad block size");
      p.block_dims.push_back(static_cast<std::size_t>(d < 0 ? -d : d));
      p.diagonal_blocks.push_back(d < 0);
    }
  }
  if (!reader.next(line)) throw ParseError(reader.number(), "missing objective vector");
  {
    std::istringstream ls(strip_punctuation(line));
    std::string tok;
    while (static_cast<long>(p.b.size()) < m && ls >> tok) p.b.push_back(parse_value(tok));
    // The vector may wrap over several lines.
    while (static_cast<long>(p.b.size()) < m) {
      if (!reader.next(line)) throw ParseError(reader.number(), "objective vector too short");
      std::istringstream more(strip_punctuation(line));
      while (static_cast<long>(p.b.size()) < m && more >> tok) p.b.push_back(parse_value(tok));
    }
  }

  std::vector<BlockMatrix> mats(static_cast<std::size_t>(m) + 1,
                                BlockMatrix::zeros(p.block_dims));
  while (reader.next(line)) {
    std::istringstream ls(line);
    long k = 0, blk = 0, i = 0, j = 0;
    std::string tok;
    if (!(ls >> k >> blk >> i >> j >> tok)) throw ParseError(reader.number(), "malformed entry");
    if (k < 0 || k > m) throw ParseError(reader.number(), "matrix index out of range");
    if (blk < 1 || blk > nblocks) throw ParseError(reader.number(), "block index out of range");
    const auto dim = static_cast<long>(p.block_dims[static_cast<std::size_t>(blk - 1)]);
    if (i < 1 || j < 1 || i > dim || j > dim) {
      throw ParseError(reader.number(), "entry index out of range");
    }
    if (p.diagonal_blocks[static_cast<std::size_t>(blk - 1)] && i != j) {
      throw ParseError(reader.number(), "off-diagonal entry in a diagonal block");
    }
    MpScalar v = parse_value(tok);
    if (k == 0) v = -v;
    MpMatrix& b = mats[static_cast<std::size_t>(k)].block(static_cast<std::size_t>(blk - 1));
    b(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)) = v;
    b(static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i - 1)) = v;
  }
  p.a0 = std::move(mats[0]);
  p.a.assign(std::make_move_iterator(mats.begin() + 1), std::make_move_iterator(mats.end()));
  p.validate();
  if (short_literals > 0) {
    result.warnings.push_back("PrecisionLoss: " + std::to_string(short_literals) +
                              " literal(s) carry fewer than " + std::to_string(needed) +
                              " significant digits and are rounded at " + std::to_string(bits) +
                              " bits");
  }
  return result;
}

ReadResult read_sdpa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_sdpa(in);
}

void write_sdpa(std::ostream& out, const SdpProblem& prob) {
  prob.validate();
  out << prob.m() << "\n" << prob.block_dims.size() << "\n";
  for (std::size_t i = 0; i < prob.block_dims.size(); ++i) {
    const bool diag = !prob.diagonal_blocks.empty() && prob.diagonal_blocks[i];
    out << (i ? " " : "") << (diag ? "-" : "") << prob.block_dims[i];
  }
  out << "\n";
  for (std::size_t k = 0; k < prob.m(); ++k) out << (k ? " " : "") << prob.b[k].to_string();
  out << "\n";
  auto emit = [&](std::size_t k, const BlockMatrix& m, bool negate) {
    for (std::size_t blk = 0; blk < m.num_blocks(); ++blk) {
      const MpMatrix& b = m.block(blk);
      for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = i; j < b.cols(); ++j) {
          if (b(i, j).is_zero()) continue;
          const MpScalar v = negate ? -b(i, j) : b(i, j);
          out << k << " " << blk + 1 << " " << i + 1 << " " << j + 1 << " " << v.to_string()
              << "\n";
        }
      }
    }
  };
  emit(0, prob.a0, true);
  for (std::size_t k = 0; k < prob.m(); ++k) emit(k + 1, prob.a[k], false);
}

void write_sdpa_file(const std::string& path, const SdpProblem& prob) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_sdpa(out, prob);
}

nlohmann::json manifest(const SdpProblem& prob, const nlohmann::json& family_meta) {
  nlohmann::json j;
  j["precision_bits"] = mpla::default_precision();
  j["m"] = prob.m();
  j["block_dims"] = prob.block_dims;
  j["sign_convention"] = "matrix 0 in the .dat-s file is -A0";
  if (!family_meta.is_null()) j["family"] = family_meta;
  return j;
}

}  // namespace sdpsens::sdp
