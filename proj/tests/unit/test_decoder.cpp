#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "neuralign/decoder.hpp"
#include "neuralign/errors.hpp"
#include "neuralign/jump.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace neuralign;
namespace nt = neuralign::testing;

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

// Emission matrix of a deterministic lexicon: source j is generated by
// target `gen[j]` (0 = NULL).
Matrix lexicon_emission(std::size_t I, const std::vector<std::size_t>& gen) {
  Matrix em(I + 1, gen.size(), std::log(1e-6));
  for (std::size_t j = 0; j < gen.size(); ++j) em(gen[j], j) = 0.0;
  return em;
}

LinkSet random_links(int J, int I, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> jd(1, J), id(1, I), cnt(0, J + I);
  LinkSet s;
  for (int k = cnt(rng); k > 0; --k) s.insert({jd(rng), id(rng)});
  return s;
}

}  // namespace

TEST(Ibm1Decode, DeterministicLexicon) {
  const Matrix em = lexicon_emission(3, {2, 0, 3, 1});
  EXPECT_EQ(ibm1_decode(em), (LinkSet{{1, 2}, {3, 3}, {4, 1}}));
}

TEST(Ibm1Decode, UniformTiesGoToFirstTarget) {
  const Matrix em(4, 3, std::log(0.2));
  EXPECT_EQ(ibm1_decode(em), (LinkSet{{1, 1}, {2, 1}, {3, 1}}));
}

TEST(Ibm1Decode, MatchesExhaustiveArgmax) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 50; ++n) {
    const Matrix em = nt::random_log_emission(3, 3, rng);
    const nt::BruteForce bf = nt::brute_force_ibm1(em);
    EXPECT_EQ(ibm1_decode(em), path_links(bf.best_path, 3));
  }
}

TEST(Viterbi, SinglePosition) {
  std::mt19937_64 rng(2);
  const Matrix em = nt::random_log_emission(3, 1, rng);
  const Matrix t = nt::random_stochastic(6, 6, rng);
  const auto init = nt::random_distribution(6, rng);
  std::size_t best = 0;
  double best_score = kNegInf;
  for (std::size_t s = 0; s < 6; ++s) {
    const double v = std::log(init[s]) + em(emission_row(s, 3), 0);
    if (v > best_score) best_score = v, best = s;
  }
  const ViterbiPath p = viterbi_path(em, std::span<const Matrix>(&t, 1), init);
  ASSERT_EQ(p.states.size(), 1u);
  EXPECT_EQ(p.states[0], best);
  EXPECT_NEAR(p.log_score, best_score, 1e-14);
}

TEST(Viterbi, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(1, 4);
  for (int n = 0; n < 80; ++n) {
    const auto I = static_cast<std::size_t>(len(rng)), J = static_cast<std::size_t>(len(rng));
    const Matrix em = nt::random_log_emission(I, J, rng);
    std::vector<Matrix> trans;
    const std::size_t count = n % 2 == 0 || J == 1 ? 1 : J - 1;
    for (std::size_t k = 0; k < count; ++k) trans.push_back(nt::random_stochastic(2 * I, 2 * I, rng));
    const auto init = nt::random_distribution(2 * I, rng);
    const nt::BruteForce bf = nt::brute_force(em, trans, init);
    const ViterbiPath p = viterbi_path(em, trans, init);
    EXPECT_EQ(p.states, bf.best_path);
    EXPECT_NEAR(p.log_score, bf.best_log_score, 1e-10);
  }
}

TEST(Viterbi, MonotoneSentenceGivesIdentity) {
  const std::size_t n = 6;
  std::vector<std::size_t> gen(n);
  for (std::size_t j = 0; j < n; ++j) gen[j] = j + 1;
  const JumpTable jump = JumpTable::uniform();
  const Matrix t = transition_matrix(n, jump);
  const LinkSet links = viterbi(lexicon_emission(n, gen), std::span<const Matrix>(&t, 1), initial_distribution(n, jump));
  LinkSet expected;
  for (int j = 1; j <= static_cast<int>(n); ++j) expected.insert({j, j});
  EXPECT_EQ(links, expected);
}

TEST(Viterbi, NullStatesProduceNoLinks) {
  EXPECT_EQ(path_links(std::vector<std::size_t>{0, 3, 2, 5}, 3), (LinkSet{{1, 1}, {3, 3}}));
}

TEST(Viterbi, ZeroProbabilityThrows) {
  const Matrix em(3, 2, kNegInf);
  const Matrix t(4, 4, 0.25);
  EXPECT_THROW(viterbi_path(em, std::span<const Matrix>(&t, 1), std::vector<double>(4, 0.25)), ZeroProbabilityError);
}

TEST(GrowDiagFinal, AgreementIsIdentity) {
  const LinkSet a = {{1, 1}, {2, 3}, {3, 2}};
  EXPECT_EQ(grow_diag_final(a, a, 3, 3), a);
}

TEST(GrowDiagFinal, DisjointSingletonsBothKept) {
  EXPECT_EQ(grow_diag_final(LinkSet{{1, 1}}, LinkSet{{2, 2}}, 2, 2), (LinkSet{{1, 1}, {2, 2}}));
}

TEST(GrowDiagFinal, HandTrace) {
  const LinkSet fwd = {{1, 1}, {1, 2}, {3, 3}};
  const LinkSet rev = {{1, 1}, {2, 1}, {2, 2}};
  EXPECT_EQ(grow_diag_final(fwd, rev, 3, 3), (LinkSet{{1, 1}, {1, 2}, {2, 1}, {3, 3}}));
}

TEST(GrowDiagFinal, FinalAndVariantIsStricter) {
  // (2,1) shares target 1 with the intersection link, so only the "either"
  // rule admits it
  const LinkSet fwd = {{1, 1}, {3, 1}};
  const LinkSet rev = {{1, 1}};
  EXPECT_EQ(grow_diag_final(fwd, rev, 3, 3, FinalRule::Either), (LinkSet{{1, 1}, {3, 1}}));
  EXPECT_EQ(grow_diag_final(fwd, rev, 3, 3, FinalRule::Both), (LinkSet{{1, 1}}));
}

TEST(GrowDiagFinal, BoundedByIntersectionAndUnion) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(1, 8);
  for (int n = 0; n < 1000; ++n) {
    const int J = len(rng), I = len(rng);
    const LinkSet f = random_links(J, I, rng), r = random_links(J, I, rng);
    const LinkSet out = grow_diag_final(f, r, static_cast<std::size_t>(J), static_cast<std::size_t>(I));
    for (const auto& l : f)
      if (r.count(l)) EXPECT_TRUE(out.count(l));
    for (const auto& l : out) EXPECT_TRUE(f.count(l) || r.count(l));
    // every union link is covered: either kept or both its words are aligned
    for (const LinkSet* s : {&f, &r}) {
      for (const auto& l : *s) {
        if (out.count(l)) continue;
        bool j_aligned = false, i_aligned = false;
        for (const auto& o : out) j_aligned |= o.source == l.source, i_aligned |= o.target == l.target;
        EXPECT_TRUE(j_aligned && i_aligned);
      }
    }
  }
}

TEST(GrowDiagFinal, CorpusVersion) {
  const AlignmentSet f = {{{1, 1}}, {}, {{1, 2}}};
  const AlignmentSet r = {{{1, 1}}, {{2, 2}}, {{1, 2}}};
  const AlignmentSet out = grow_diag_final(f, r);
  EXPECT_EQ(out, (AlignmentSet{{{1, 1}}, {{2, 2}}, {{1, 2}}}));
  EXPECT_THROW(grow_diag_final(f, AlignmentSet(2)), Error);
}

TEST(ReverseLinks, SwapsRoles) {
  EXPECT_EQ(reverse_links(LinkSet{{1, 2}, {3, 1}}), (LinkSet{{2, 1}, {1, 3}}));
}

TEST(Pharaoh, Format) {
  std::ostringstream out;
  write_pharaoh(out, AlignmentSet{{{1, 1}, {2, 3}}, {}});
  EXPECT_EQ(out.str(), "0-0 1-2\n\n");
}

TEST(Pharaoh, RoundTrip) {
  std::mt19937_64 rng(5);
  AlignmentSet a;
  for (int n = 0; n < 100; ++n) a.push_back(random_links(7, 9, rng));
  std::stringstream s;
  write_pharaoh(s, a);
  EXPECT_EQ(read_pharaoh(s), a);
}

TEST(Pharaoh, MalformedIsDataError) {
  std::istringstream bad("0-0 1x2\n");
  EXPECT_THROW(read_pharaoh(bad), DataError);
  std::istringstream neg("-1-0\n");
  EXPECT_THROW(read_pharaoh(neg), DataError);
}
