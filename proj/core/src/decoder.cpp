#include "neuralign/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "neuralign/errors.hpp"
#include "neuralign/inference.hpp"

namespace neuralign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

LinkSet ibm1_decode(const Matrix& emission_log) {
  if (emission_log.rows() < 2) throw ShapeError("emission matrix needs at least one target word");
  const std::size_t I = emission_log.rows() - 1;
  LinkSet links;
  for (std::size_t j = 0; j < emission_log.cols(); ++j) {
    std::size_t best = 0;
    double best_score = kNegInf;
    bool found = false;
    for (std::size_t i = 1; i <= I; ++i) {
      if (!found || emission_log(i, j) > best_score) {
        best = i;
        best_score = emission_log(i, j);
        found = true;
      }
    }
    if (emission_log(0, j) > best_score) continue;  // null wins
    links.insert({static_cast<int>(j + 1), static_cast<int>(best)});
  }
  return links;
}

ViterbiPath viterbi_path(const Matrix& emission_log, std::span<const Matrix> transitions,
                         std::span<const double> initial) {
  if (emission_log.rows() < 2 || emission_log.cols() < 1) throw ShapeError("viterbi: bad emission shape");
  const std::size_t I = emission_log.rows() - 1;
  const std::size_t J = emission_log.cols();
  const std::size_t S = state_count(I);
  if (initial.size() != S) throw ShapeError("viterbi: initial distribution must have 2I entries");
  if (J > 1 && transitions.size() != 1 && transitions.size() != J - 1) {
    throw ShapeError("viterbi needs one shared or J-1 transition matrices");
  }
  std::vector<Matrix> log_t;
  log_t.reserve(transitions.size());
  for (const auto& t : transitions) {
    if (t.rows() != S || t.cols() != S) throw ShapeError("viterbi: transition matrix must be [2I x 2I]");
    Matrix l(S, S);
    for (std::size_t k = 0; k < t.size(); ++k) l.data()[k] = safe_log(t.data()[k]);
    log_t.push_back(std::move(l));
  }
  std::vector<double> delta(S);
  std::vector<double> next(S);
  std::vector<std::vector<std::size_t>> back(J, std::vector<std::size_t>(S, 0));
  for (std::size_t s = 0; s < S; ++s) delta[s] = safe_log(initial[s]) + emission_log(emission_row(s, I), 0);
  for (std::size_t j = 1; j < J; ++j) {
    const Matrix& lt = log_t.size() == 1 ? log_t[0] : log_t[j - 1];
    for (std::size_t t = 0; t < S; ++t) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t s = 0; s < S; ++s) {
        const double v = delta[s] + lt(s, t);
        if (v > best) {
          best = v;
          arg = s;
        }
      }
      next[t] = best + emission_log(emission_row(t, I), j);
      back[j][t] = arg;
    }
    std::swap(delta, next);
  }
  ViterbiPath path;
  std::size_t last = 0;
  double best = kNegInf;
  for (std::size_t s = 0; s < S; ++s) {
    if (delta[s] > best) {
      best = delta[s];
      last = s;
    }
  }
  if (best == kNegInf || std::isnan(best)) throw ZeroProbabilityError("viterbi: every path has zero probability");
  path.log_score = best;
  path.states.assign(J, 0);
  path.states[J - 1] = last;
  for (std::size_t j = J - 1; j > 0; --j) path.states[j - 1] = back[j][path.states[j]];
  return path;
}

LinkSet path_links(std::span<const std::size_t> states, std::size_t target_length) {
  LinkSet links;
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (is_null_state(states[j], target_length)) continue;
    links.insert({static_cast<int>(j + 1), state_position(states[j], target_length)});
  }
  return links;
}

LinkSet viterbi(const Matrix& emission_log, std::span<const Matrix> transitions, std::span<const double> initial) {
  const auto path = viterbi_path(emission_log, transitions, initial);
  return path_links(path.states, emission_log.rows() - 1);
}

LinkSet grow_diag_final(const LinkSet& forward, const LinkSet& reverse, std::size_t source_length,
                        std::size_t target_length, FinalRule rule) {
  const int J = static_cast<int>(source_length);
  const int I = static_cast<int>(target_length);
  for (const LinkSet* set : {&forward, &reverse}) {
    for (const auto& l : *set) {
      if (l.source < 1 || l.source > J || l.target < 1 || l.target > I) {
        throw DataError("link " + std::to_string(l.source) + "-" + std::to_string(l.target) +
                        " is outside the sentence bounds");
      }
    }
  }
  LinkSet uni = forward;
  uni.insert(reverse.begin(), reverse.end());
  LinkSet out;
  std::set_intersection(forward.begin(), forward.end(), reverse.begin(), reverse.end(),
                        std::inserter(out, out.end()));
  std::vector<char> source_aligned(source_length + 1, 0);
  std::vector<char> target_aligned(target_length + 1, 0);
  auto add = [&](const Link& l) {
    out.insert(l);
    source_aligned[static_cast<std::size_t>(l.source)] = 1;
    target_aligned[static_cast<std::size_t>(l.target)] = 1;
  };
  for (const auto& l : out) add(l);

  static constexpr int kNeighbours[8][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool grew = true;
  while (grew) {
    grew = false;
    for (int i = 1; i <= I; ++i) {
      for (int j = 1; j <= J; ++j) {
        if (!out.count({j, i})) continue;
        for (const auto& d : kNeighbours) {
          const Link n{j + d[1], i + d[0]};
          if (n.source < 1 || n.source > J || n.target < 1 || n.target > I) continue;
          if (out.count(n) || !uni.count(n)) continue;
          if (!source_aligned[static_cast<std::size_t>(n.source)] || !target_aligned[static_cast<std::size_t>(n.target)]) {
            add(n);
            grew = true;
          }
        }
      }
    }
  }
  auto final_pass = [&](const LinkSet& directional) {
    for (int i = 1; i <= I; ++i) {
      for (int j = 1; j <= J; ++j) {
        if (!directional.count({j, i}) || out.count({j, i})) continue;
        const bool s_free = !source_aligned[static_cast<std::size_t>(j)];
        const bool t_free = !target_aligned[static_cast<std::size_t>(i)];
        if (rule == FinalRule::Either ? (s_free || t_free) : (s_free && t_free)) add({j, i});
      }
    }
  };
  final_pass(forward);
  final_pass(reverse);
  return out;
}

AlignmentSet grow_diag_final(const AlignmentSet& forward, const AlignmentSet& reverse, FinalRule rule) {
  if (forward.size() != reverse.size()) {
    throw DataError("forward and reverse alignments cover " + std::to_string(forward.size()) + " and " +
                    std::to_string(reverse.size()) + " sentences");
  }
  AlignmentSet out(forward.size());
  for (std::size_t n = 0; n < forward.size(); ++n) {
    std::size_t J = 0;
    std::size_t I = 0;
    for (const LinkSet* set : {&forward[n], &reverse[n]}) {
      for (const auto& l : *set) {
        J = std::max(J, static_cast<std::size_t>(std::max(l.source, 0)));
        I = std::max(I, static_cast<std::size_t>(std::max(l.target, 0)));
      }
    }
    out[n] = grow_diag_final(forward[n], reverse[n], J, I, rule);
  }
  return out;
}

LinkSet reverse_links(const LinkSet& links) {
  LinkSet out;
  for (const auto& l : links) out.insert({l.target, l.source});
  return out;
}

AlignmentSet reverse_links(const AlignmentSet& links) {
  AlignmentSet out;
  out.reserve(links.size());
  for (const auto& s : links) out.push_back(reverse_links(s));
  return out;
}

void write_pharaoh(std::ostream& out, const AlignmentSet& alignments) {
  for (const auto& links : alignments) {
    bool first = true;
    for (const auto& l : links) {
      if (!first) out << ' ';
      first = false;
      out << l.source - 1 << '-' << l.target - 1;
    }
    out << '\n';
  }
}

void write_pharaoh(const std::filesystem::path& path, const AlignmentSet& alignments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_pharaoh(out, alignments);
  if (!out) throw DataError("failed writing " + path.string());
}

AlignmentSet read_pharaoh(std::istream& in) {
  AlignmentSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LinkSet links;
    std::istringstream ss(line);
    std::string token;
    std::size_t col = 0;
    while (ss >> token) {
      ++col;
      const auto dash = token.find('-');
      auto bad = [&] {
        return DataError("malformed alignment token '" + token + "' at line " + std::to_string(line_no) +
                         ", token " + std::to_string(col));
      };
      if (dash == std::string::npos || dash == 0 || dash + 1 == token.size()) throw bad();
      const std::string a = token.substr(0, dash);
      const std::string b = token.substr(dash + 1);
      if (a.find_first_not_of("0123456789") != std::string::npos ||
          b.find_first_not_of("0123456789") != std::string::npos || a.size() > 9 || b.size() > 9) {
        throw bad();
      }
      links.insert({std::stoi(a) + 1, std::stoi(b) + 1});
    }
    out.push_back(std::move(links));
  }
  return out;
}

AlignmentSet read_pharaoh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_pharaoh(in);
}

}  // namespace neuralign
