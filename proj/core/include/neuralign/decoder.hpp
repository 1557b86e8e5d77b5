#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "neuralign/links.hpp"
#include "neuralign/matrix.hpp"

namespace neuralign {

// Argmax over the 2I states for every source position under the uniform
// prior. Ties go to the smallest real position, and real states beat null
// states. Null decisions produce no link.
LinkSet ibm1_decode(const Matrix& emission_log);

struct ViterbiPath {
  std::vector<std::size_t> states;  // one state per source position
  double log_score = 0.0;
};

// Max-product path in log space; ties go to the lower state index. Throws
// ZeroProbabilityError when every path has probability zero.
ViterbiPath viterbi_path(const Matrix& emission_log, std::span<const Matrix> transitions,
                         std::span<const double> initial);
LinkSet viterbi(const Matrix& emission_log, std::span<const Matrix> transitions, std::span<const double> initial);

// Links of a state path (null states dropped).
LinkSet path_links(std::span<const std::size_t> states, std::size_t target_length);

enum class FinalRule {
  Either,  // grow-diag-final: a union link is added if either word is unaligned
  Both,    // grow-diag-final-and: only if both words are unaligned
};

// Symmetrises two directional alignments of one sentence pair given in the
// same (source j, target i) orientation. Starts from the intersection, grows
// along the 8-neighbourhood through union links touching an unaligned word,
// then runs the final pass over the forward and then the reverse links.
LinkSet grow_diag_final(const LinkSet& forward, const LinkSet& reverse, std::size_t source_length,
                        std::size_t target_length, FinalRule rule = FinalRule::Either);
// Corpus version; both sets must cover the same number of sentences.
// Sentence bounds are the largest indices present in either direction.
AlignmentSet grow_diag_final(const AlignmentSet& forward, const AlignmentSet& reverse,
                             FinalRule rule = FinalRule::Either);

// Swaps the roles of source and target in every link.
LinkSet reverse_links(const LinkSet& links);
AlignmentSet reverse_links(const AlignmentSet& links);

// Pharaoh format: one line per sentence, `j-i` tokens, 0-based on disk.
void write_pharaoh(std::ostream& out, const AlignmentSet& alignments);
void write_pharaoh(const std::filesystem::path& path, const AlignmentSet& alignments);
AlignmentSet read_pharaoh(std::istream& in);
AlignmentSet read_pharaoh(const std::filesystem::path& path);

}  // namespace neuralign
