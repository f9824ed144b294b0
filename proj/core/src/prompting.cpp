#include "ragxlate/prompting.hpp"

#include "ragxlate/errors.hpp"
#include "ragxlate/tokenizer.hpp"

namespace ragxlate {

namespace {

constexpr const char* kZeroShotLead =
    "Translate the following code from Fortran to CPP:\n";
constexpr const char* kExampleLead =
    "Here's an example of a code translated from Fortran to CPP:\n";
constexpr const char* kExampleSource = "Here's the Fortran code:\n";
constexpr const char* kExampleTarget = "Here's the CPP translation:\n";
constexpr const char* kFewShotLead =
    "Now translate the following code from Fortran to CPP:\n";

int lexer_token_count(const std::string& text) {
  return static_cast<int>(tokenize(text).size());
}

// ceil(1.3 * count), in integer arithmetic so the estimate is bit-stable
int scale_count(int count) { return (13 * count + 9) / 10; }

int whole_prompt_estimate(const std::string& system, const std::string& user) {
  return scale_count(lexer_token_count(system) + lexer_token_count(user));
}

std::string assemble_few_shot_user(const CodePair& query,
                                   const std::vector<RetrievedExample>& examples,
                                   std::size_t take) {
  std::string user;
  for (std::size_t i = 0; i < take; ++i) {
    user += kExampleLead;
    user += kExampleSource;
    user += examples[i].fortran;
    user += '\n';
    user += kExampleTarget;
    user += examples[i].cpp;
    user += '\n';
  }
  user += kFewShotLead;
  user += query.fortran;
  return user;
}

}  // namespace

int estimate_tokens(const std::string& text) {
  return scale_count(lexer_token_count(text));
}

Prompt build_zero_shot(const CodePair& query) {
  if (query.fortran.empty())
    throw ArgumentError("build_zero_shot: query snippet is empty");
  Prompt p;
  p.system = kSystemLine;
  p.user = kZeroShotLead + query.fortran;
  p.shots = 0;
  p.est_tokens = whole_prompt_estimate(p.system, p.user);
  return p;
}

Prompt build_few_shot(const CodePair& query,
                      const std::vector<RetrievedExample>& examples,
                      int max_context_tokens) {
  if (query.fortran.empty())
    throw ArgumentError("build_few_shot: query snippet is empty");
  for (const RetrievedExample& ex : examples) {
    if (ex.pair_id == query.id)
      throw ArgumentError("build_few_shot: example '" + ex.pair_id +
                          "' is the query itself; exclude it during retrieval");
  }

  // drop from the tail (least similar first) until the estimate fits
  std::size_t take = examples.size();
  for (;;) {
    std::string user = assemble_few_shot_user(query, examples, take);
    const int est = whole_prompt_estimate(kSystemLine, user);
    if (est <= max_context_tokens) {
      Prompt p;
      p.system = kSystemLine;
      p.user = std::move(user);
      p.shots = static_cast<int>(take);
      p.example_ids.reserve(take);
      for (std::size_t i = 0; i < take; ++i)
        p.example_ids.push_back(examples[i].pair_id);
      p.est_tokens = est;
      return p;
    }
    if (take == 0)
      throw ContextOverflowError(
          "query '" + query.id + "' alone exceeds the context budget (" +
          std::to_string(est) + " > " + std::to_string(max_context_tokens) + ")");
    --take;
  }
}

}  // namespace ragxlate
