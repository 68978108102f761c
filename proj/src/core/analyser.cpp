#include "core/analyser.hpp"

#include <map>

namespace mrf {

std::vector<InputClass> group_by_ctrace(const std::vector<CTrace>& ctraces,
                                        const std::vector<HTrace>& htraces) {
  std::vector<InputClass> classes;
  std::map<CTrace, std::size_t> index;
  for (std::size_t i = 0; i < ctraces.size(); ++i) {
    auto [it, fresh] = index.try_emplace(ctraces[i], classes.size());
    if (fresh) classes.push_back({ctraces[i], {}, {}});
    InputClass& cl = classes[it->second];
    cl.members.push_back(i);
    if (i < htraces.size()) cl.htraces.push_back(htraces[i]);
  }
  return classes;
}

ClassVerdict check_class(const InputClass& cl, MatchMode mode) {
  ClassVerdict v;
  for (std::size_t a = 0; a < cl.members.size(); ++a)
    for (std::size_t b = a + 1; b < cl.members.size(); ++b) {
      const HTrace x = cl.htraces[a], y = cl.htraces[b];
      const bool ok = mode == MatchMode::kFull ? x == y : htrace_subset(x, y) || htrace_subset(y, x);
      if (!ok) v.suspects.emplace_back(cl.members[a], cl.members[b]);
    }
  v.clean = v.suspects.empty();
  return v;
}

MatchMode match_mode_for(const MachineConfig& mc) {
  return mc.reset_per_input ? MatchMode::kFull : MatchMode::kSubset;
}

std::optional<Violation> has_violations(const std::vector<CTrace>& ctraces,
                                        const std::vector<HTrace>& htraces,
                                        const AnalysisSubject& s, AnalysisStats* stats) {
  AnalysisStats local;
  AnalysisStats& st = stats ? *stats : local;
  st = {};

  const auto classes = group_by_ctrace(ctraces, htraces);
  st.classes = classes.size();
  std::vector<IndexPair> suspects;
  for (const InputClass& cl : classes) {
    if (!cl.effective()) continue;
    ++st.effective_classes;
    auto v = check_class(cl, match_mode_for(s.machine));
    suspects.insert(suspects.end(), v.suspects.begin(), v.suspects.end());
  }
  st.suspects = suspects.size();
  if (suspects.empty()) return std::nullopt;

  // Nested re-check: only the inputs involved in a surviving suspect are
  // re-modelled, and each at most once.
  Contract nested = s.contract;
  nested.nesting = true;
  const Model nested_model(nested);
  const LinearProgram prog = linearize(s.test_case);
  std::map<std::size_t, CTrace> nested_traces;
  auto nested_trace = [&](std::size_t k) -> const CTrace& {
    auto it = nested_traces.find(k);
    if (it == nested_traces.end())
      it = nested_traces.emplace(k, nested_model.run(prog, s.inputs[k]).ctrace).first;
    return it->second;
  };

  const std::size_t batch = s.machine.priming_batch;
  for (std::size_t start = 0; start < suspects.size(); start += batch) {
    const std::size_t end = std::min(suspects.size(), start + batch);
    for (std::size_t k = start; k < end; ++k) {
      const auto [i, j] = suspects[k];
      ++st.primed;
      if (prime_and_compare(s.machine, s.test_case, s.inputs, htraces, i, j) ==
          PrimingVerdict::kFalsePositive) {
        ++st.false_positives;
        continue;
      }
      if (nested_trace(i) != nested_trace(j)) {
        ++st.nested_rejections;
        continue;
      }
      Violation v;
      v.test_case = s.test_case;
      v.contract = s.contract;
      v.i = i;
      v.j = j;
      v.input_i = s.inputs[i];
      v.input_j = s.inputs[j];
      v.ctrace = ctraces[i];
      v.htrace_i = htraces[i];
      v.htrace_j = htraces[j];
      v.priming = PrimingVerdict::kGenuine;
      return v;
    }
  }
  return std::nullopt;
}

std::optional<Violation> detect_violation(const MachineConfig& mc, const Contract& contract,
                                          const TestCase& tc, const std::vector<Input>& inputs,
                                          AnalysisStats* stats) {
  const LinearProgram prog = linearize(tc);
  const Model model(contract);
  std::vector<CTrace> ctraces;
  ctraces.reserve(inputs.size());
  for (const Input& in : inputs) ctraces.push_back(model.run(prog, in).ctrace);
  const auto htraces = measure(mc, prog, inputs);
  return has_violations(ctraces, htraces, {mc, contract, tc, inputs}, stats);
}

}  // namespace mrf
