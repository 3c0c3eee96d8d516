// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stance/corpus.hpp"

namespace stance {

struct TargetSpec {
  std::string target_id;
  std::string display_phrase;  // substituted for {target}
};

// The three canonical targets and their exact display phrasings.
const std::vector<TargetSpec>& canonical_targets();
std::optional<TargetSpec> find_canonical_target(std::string_view target_id);

// Builds a TargetSpec, enforcing that canonical target ids keep their
// canonical phrasing and that custom phrases are nonempty.
TargetSpec make_target_spec(const std::string& target_id,
                            const std::string& display_phrase);

// Resolves a target id to its canonical spec, or the id itself as phrase
// for non-canonical (e.g. synthetic) targets.
TargetSpec resolve_target(const std::string& target_id);

struct ParsedVote {
  std::optional<StanceLabel> label;  // nullopt = unparsable
  std::string raw;                   // verbatim reply, kept for audit

  bool unparsable() const { return !label.has_value(); }
};

// The v1 prompt template, with {tweets} and {target} slots. Golden tests pin
// these bytes against assets/prompt_template_v1.txt.
const std::string& prompt_template();

// Instantiates the template: {target} replaced by the display phrase,
// {tweets} by the texts joined with single newlines, in input order.
// Throws on an empty tweet list or when a tweet contains a line equal to
// the "END OF TWEETS" sentinel.
std::string render_prompt(const std::vector<std::string>& tweet_texts,
                          const TargetSpec& target);

// Total function: trims whitespace and trailing punctuation (.,!;:), then
// compares case-insensitively against the two labels. Anything else is
// unparsable and keeps the verbatim reply.
ParsedVote parse_reply(const std::string& raw);

}  // namespace stance
