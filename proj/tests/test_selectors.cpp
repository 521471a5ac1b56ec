#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "erase/errors.hpp"
#include "erase/selectors.hpp"
#include "erase/stats.hpp"
#include "erase/synthetic.hpp"
#include "erase/unlearn_engine.hpp"
#include "test_util.hpp"

using namespace erase;
using testutil::corpus_from_rows;

namespace {

QkmConfig cfg(std::size_t k, double eps, std::size_t iters) {
  QkmConfig c;
  c.k = k;
  c.epsilon = eps;
  c.iters = iters;
  return c;
}

}  // namespace

TEST_CASE("erase selection on the four-point instance") {
  const Corpus c = corpus_from_rows({{0.0f, 0.0f}, {0.1f, 0.0f}, {0.9f, 0.0f}, {1.0f, 0.0f}});
  const std::vector<ExampleId> seeds = {1, 4};
  const QkmModel m =
      train_with(c.points(), cfg(2, 0.5, 2), LatticeSpec{0.5, {0.0, 0.0}, 0, PhaseCell::Epsilon}, seeds, 0);
  CHECK(exemplars(m) == std::vector<ExampleId>{1, 4});
}

TEST_CASE("selection with k equal to |D| returns every id") {
  const Corpus c = corpus_from_rows({{0.0f}, {2.0f}, {4.0f}, {6.0f}});
  for (auto model : {select_erase(c, cfg(4, 0.05, 3), 1), select_acot(c, 4, 3, 1), select_random(c, 4, 1)}) {
    auto s = model.selected;
    std::sort(s.begin(), s.end());
    CHECK(s == c.ids());
  }
}

TEST_CASE("selection is deterministic") {
  const Corpus c = gaussian_mixture({.size = 100, .dim = 4, .components = 3, .spread = 0.1}, 3);
  CHECK(select_erase(c, cfg(3, 0.05, 5), 9).selected == select_erase(c, cfg(3, 0.05, 5), 9).selected);
  CHECK(select_acot(c, 3, 5, 9).selected == select_acot(c, 3, 5, 9).selected);
  CHECK(select_random(c, 3, 9).selected == select_random(c, 3, 9).selected);
}

TEST_CASE("selected ids are live, distinct and cluster heads") {
  const Corpus c = gaussian_mixture({.size = 150, .dim = 3, .components = 4, .spread = 0.1}, 5);
  const SelectionModel e = select_erase(c, cfg(4, 0.05, 5), 2);
  const auto& q = std::get<QkmModel>(e.state);
  CHECK(e.selected.size() == 4);
  CHECK(std::set<ExampleId>(e.selected.begin(), e.selected.end()).size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    if (!q.sorted_members[j].empty()) CHECK(e.selected[j] == q.sorted_members[j].front().id);
  }
}

TEST_CASE("too many examples requested") {
  const Corpus c = corpus_from_rows({{0.0f}, {1.0f}});
  try {
    select_random(c, 3, 0);
    FAIL("expected TooFewExamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewExamples);
  }
  CHECK_THROWS_AS(select_erase(c, cfg(3, 0.05, 2), 0), Error);
  CHECK_THROWS_AS(select_random(c, 0, 0), Error);
}

TEST_CASE("random selection of pairs is uniform") {
  const Corpus c = corpus_from_rows({{0.0f}, {1.0f}, {2.0f}, {3.0f}, {4.0f}});
  std::map<std::pair<ExampleId, ExampleId>, std::size_t> index;
  for (ExampleId a = 1; a <= 5; ++a) {
    for (ExampleId b = a + 1; b <= 5; ++b) index[{a, b}] = index.size();
  }
  std::vector<std::uint64_t> counts(10, 0);
  for (Seed s = 0; s < 10'000; ++s) {
    auto sel = select_random(c, 2, s).selected;
    std::sort(sel.begin(), sel.end());
    ++counts[index.at({sel[0], sel[1]})];
  }
  const std::vector<double> probs(10, 0.1);
  CHECK(chi_square_gof(counts, probs).p_value > 0.01);
}

TEST_CASE("random unlearning") {
  const Corpus c = corpus_from_rows({{0.0f}, {1.0f}, {2.0f}, {3.0f}});
  const SelectionModel m = select_random(c, 2, 4);

  SUBCASE("victim not selected keeps the selection") {
    ExampleId victim = 1;
    while (std::find(m.selected.begin(), m.selected.end(), victim) != m.selected.end()) ++victim;
    Rng rng(0);
    const auto del = unlearn_selection(m, c, victim, rng);
    CHECK(del.model.selected == m.selected);
    CHECK(del.outcome.kind == OutcomeKind::Stable);
    CHECK(del.model.live_ids().size() == 3);
  }
  SUBCASE("replacement is uniform over the unselected ids") {
    const ExampleId victim = m.selected[0];
    std::map<ExampleId, int> hits;
    for (Seed s = 0; s < 10'000; ++s) {
      Rng rng(s);
      const auto del = unlearn_selection(m, c, victim, rng);
      CHECK(del.outcome.kind == OutcomeKind::ExemplarReplaced);
      ++hits[del.model.selected[0]];
    }
    REQUIRE(hits.size() == 2);
    for (const auto& [id, n] : hits) {
      CHECK(std::find(m.selected.begin(), m.selected.end(), id) == m.selected.end());
      CHECK(std::abs(n - 5000) <= 150);
    }
  }
}

TEST_CASE("random unlearning with nothing left to draw") {
  const Corpus c = corpus_from_rows({{0.0f}, {1.0f}});
  const SelectionModel m = select_random(c, 2, 0);
  Rng rng(0);
  try {
    unlearn_selection(m, c, m.selected[0], rng);
    FAIL("expected CannotReplace");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CannotReplace);
  }
}

TEST_CASE("erase unlearning of a stable non-exemplar keeps the selection") {
  const Corpus c = gaussian_mixture({.size = 400, .dim = 4, .components = 2, .spread = 0.01}, 12);
  const SelectionModel m = select_erase(c, cfg(2, 0.05, 5), 3);
  const auto& q = std::get<QkmModel>(m.state);
  int checked = 0;
  for (ExampleId victim : c.ids()) {
    if (std::find(m.selected.begin(), m.selected.end(), victim) != m.selected.end()) continue;
    if (deletion_certificate(q, c, victim).kind != CertificateKind::Stable) continue;
    Rng rng(0);
    const auto del = unlearn_selection(m, c, victim, rng);
    CHECK(del.outcome.kind == OutcomeKind::Stable);
    CHECK(del.model.selected == m.selected);
    if (++checked == 20) break;
  }
  CHECK(checked == 20);
}

TEST_CASE("acot unlearning always retrains") {
  const Corpus c = gaussian_mixture({.size = 60, .dim = 3, .components = 2, .spread = 0.1}, 1);
  const SelectionModel m = select_acot(c, 2, 5, 3);
  Rng rng(5);
  Rng oracle = rng;
  const auto del = unlearn_selection(m, c, 10, rng);
  CHECK(del.outcome.kind == OutcomeKind::Retrained);
  CHECK(del.outcome.cause == RetrainCause::AlwaysRetrain);
  std::vector<ExampleId> rest;
  for (ExampleId id : c.ids()) {
    if (id != 10) rest.push_back(id);
  }
  CHECK(std::get<KmeansppModel>(del.model.state) == train_kmeanspp(c.points(rest), 2, 5, oracle.next_u64()));
}

TEST_CASE("deleted ids never come back") {
  for (Strategy strategy : {Strategy::Erase, Strategy::Acot, Strategy::Random}) {
    const Corpus c = gaussian_mixture({.size = 60, .dim = 3, .components = 3, .spread = 0.1}, 7);
    SelectionModel m = strategy == Strategy::Erase  ? select_erase(c, cfg(3, 0.05, 4), 1)
                       : strategy == Strategy::Acot ? select_acot(c, 3, 4, 1)
                                                    : select_random(c, 3, 1);
    Rng stream_rng(2);
    const auto stream = sample_uniform_stream(c, 50, stream_rng);
    std::set<ExampleId> gone;
    for (const auto& req : stream) {
      Rng rng(req.index);
      m = unlearn_selection(m, c, req.victim_id, rng).model;
      gone.insert(req.victim_id);
      for (ExampleId id : m.selected) CHECK(!gone.contains(id));
      for (ExampleId id : m.live_ids()) CHECK(!gone.contains(id));
      CHECK(m.selected.size() == 3);
    }
  }
}

TEST_CASE("strategy names") {
  CHECK(strategy_from_string("acot") == Strategy::Acot);
  CHECK(to_string(Strategy::Random) == "random");
  CHECK_THROWS_AS(strategy_from_string("nope"), Error);
}
