#pragma once

// Decision table from limit verdicts of H_i, P_i, Pbar_i, Punder_i to the
// predicted behaviour of u and v at infinity. First match wins.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "radphi/error.hpp"
#include "radphi/functionals.hpp"

namespace radphi {

enum class Rule { Thm1Large, Thm2Bounded, Thm3Case1, Thm3Case2, Thm4BoundedSandwich, Thm5i, Thm5ii, NoRuleMatched };

enum class Behavior { Large, Bounded, Unknown };

inline std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::Thm1Large: return "Thm1-large";
    case Rule::Thm2Bounded: return "Thm2-bounded";
    case Rule::Thm3Case1: return "Thm3-case1";
    case Rule::Thm3Case2: return "Thm3-case2";
    case Rule::Thm4BoundedSandwich: return "Thm4-bounded-sandwich";
    case Rule::Thm5i: return "Thm5-i";
    case Rule::Thm5ii: return "Thm5-ii";
    case Rule::NoRuleMatched: return "NoRuleMatched";
  }
  return "?";
}

inline std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::Large: return "Large";
    case Behavior::Bounded: return "Bounded";
    case Behavior::Unknown: return "Unknown";
  }
  return "?";
}

/// The six limits the table reads. Index 0 is equation 1.
struct HypothesisVerdicts {
  std::array<LimitVerdict, 2> H;
  std::array<LimitVerdict, 2> Punder;
  std::array<LimitVerdict, 2> Pbar;

  static HypothesisVerdicts from(const ProbeResult& p) { return {p.H, p.Punder, p.Pbar}; }
};

struct ClassificationReport {
  Rule rule = Rule::NoRuleMatched;
  Behavior u = Behavior::Unknown;
  Behavior v = Behavior::Unknown;
  HypothesisVerdicts verdicts;
  std::vector<std::string> blocking;  // NoRuleMatched: verdicts that kept each rule from matching
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

namespace detail {

inline bool infinite(const LimitVerdict& v) { return v.tag == LimitTag::Diverges; }
inline bool finite(const LimitVerdict& v) { return v.tag == LimitTag::Converges; }

/// Pbar_i(inf) < H_i(inf) < inf, with the Pbar error bar on the left side.
inline bool bar_below_h(const LimitVerdict& bar, const LimitVerdict& h) {
  return finite(bar) && finite(h) && bar.value + bar.err < h.value;
}

}  // namespace detail

inline ClassificationReport classify(const HypothesisVerdicts& hv) {
  using detail::bar_below_h;
  using detail::finite;
  using detail::infinite;
  ClassificationReport rep;
  rep.verdicts = hv;
  const auto& H = hv.H;
  const auto& Pu = hv.Punder;
  const auto& Pb = hv.Pbar;

  for (int i = 0; i < 2; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (infinite(Pu[ii]) && finite(Pb[ii])) {
      rep.warnings.push_back("Punder" + std::to_string(i + 1) + "(inf) diverges while Pbar" + std::to_string(i + 1) +
                             "(inf) converges; the two limits cannot both hold");
    }
  }

  struct Candidate {
    Rule rule;
    Behavior u, v;
    bool matched;
  };
  const bool both_h_inf = infinite(H[0]) && infinite(H[1]);
  const Candidate table[] = {
      {Rule::Thm1Large, Behavior::Large, Behavior::Large, both_h_inf && infinite(Pu[0]) && infinite(Pu[1])},
      {Rule::Thm2Bounded, Behavior::Bounded, Behavior::Bounded, both_h_inf && finite(Pb[0]) && finite(Pb[1])},
      {Rule::Thm3Case1, Behavior::Bounded, Behavior::Large, both_h_inf && finite(Pb[0]) && infinite(Pu[1])},
      {Rule::Thm3Case2, Behavior::Large, Behavior::Bounded, both_h_inf && infinite(Pu[0]) && finite(Pb[1])},
      {Rule::Thm4BoundedSandwich, Behavior::Bounded, Behavior::Bounded,
       bar_below_h(Pb[0], H[0]) && bar_below_h(Pb[1], H[1])},
      {Rule::Thm5i, Behavior::Large, Behavior::Bounded, infinite(H[0]) && infinite(Pu[0]) && bar_below_h(Pb[1], H[1])},
      {Rule::Thm5ii, Behavior::Bounded, Behavior::Large, bar_below_h(Pb[0], H[0]) && infinite(H[1]) && infinite(Pu[1])},
  };
  for (const auto& c : table) {
    if (!c.matched) continue;
    rep.rule = c.rule;
    rep.u = c.u;
    rep.v = c.v;
    if (c.rule == Rule::Thm4BoundedSandwich) {
      rep.notes.push_back(
          "existence under H_i(inf) < inf is not covered by the large-solution construction; the bounded "
          "prediction rests on the sandwich a_i + Punder_i <= w_i <= H_i^{-1}(Pbar_i)");
    }
    return rep;
  }
  const char* names[] = {"H1", "H2", "Punder1", "Punder2", "Pbar1", "Pbar2"};
  const LimitVerdict* vs[] = {&H[0], &H[1], &Pu[0], &Pu[1], &Pb[0], &Pb[1]};
  for (int j = 0; j < 6; ++j) {
    if (vs[j]->tag == LimitTag::Inconclusive) {
      rep.blocking.push_back(std::string(names[j]) + " is Inconclusive" +
                             (vs[j]->note.empty() ? "" : " (" + vs[j]->note + ")"));
    }
  }
  if (rep.blocking.empty()) rep.blocking.push_back("verdict pattern matches no rule");
  return rep;
}

/// Upper envelopes H_i^{-1}(Pbar_i(inf)) for the components predicted
/// Bounded. Throws for a component predicted Large or Unknown. H tables
/// come from the probe tables.
struct Envelope {
  std::optional<double> u_sup;
  std::optional<double> v_sup;
};

inline double component_envelope(const ClassificationReport& rep, const FunctionalTable& tables, int i) {
  const Behavior b = i == 0 ? rep.u : rep.v;
  if (b != Behavior::Bounded) {
    throw InputError("no finite envelope for component " + std::string(i == 0 ? "u" : "v") + " predicted " +
                     std::string(to_string(b)));
  }
  const auto ii = static_cast<std::size_t>(i);
  const LimitVerdict& bar = rep.verdicts.Pbar[ii];
  if (!bar.converges() || !tables.H[ii]) throw InputError("envelope needs a converged Pbar and an H table");
  const auto inv = tables.H[ii]->inverse(bar.value);
  if (inv.saturated) return std::numeric_limits<double>::infinity();
  return inv.value;
}

inline Envelope finite_envelope(const ClassificationReport& rep, const FunctionalTable& tables) {
  if (rep.u != Behavior::Bounded && rep.v != Behavior::Bounded) {
    throw InputError("finite envelope requested but no component is predicted Bounded");
  }
  Envelope e;
  if (rep.u == Behavior::Bounded) e.u_sup = component_envelope(rep, tables, 0);
  if (rep.v == Behavior::Bounded) e.v_sup = component_envelope(rep, tables, 1);
  return e;
}

}  // namespace radphi
