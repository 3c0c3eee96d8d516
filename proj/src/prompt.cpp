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

#include "stance/prompt.hpp"

#include <algorithm>

#include "stance/errors.hpp"
#include "stance/util.hpp"

namespace stance {

namespace {

constexpr std::string_view kSentinel = "END OF TWEETS";

// v1 template. Must stay byte-identical to assets/prompt_template_v1.txt;
// a golden test enforces this. No trailing newline.
constexpr std::string_view kTemplateV1 =
    "Read the following Tweets from a single user:\n"
    "\n"
    "TWEETS\n"
    "{tweets}\n"
    "END OF TWEETS\n"
    "\n"
    "Based on these Tweets, do you think this user supports or is against "
    "{target}?\n"
    "\n"
    "Note that the Tweets may not mention {target} at all. But do still try "
    "to make an educated guess about whether the user supports or is against "
    "{target}.\n"
    "\n"
    "Respond with one of these options: Support, Against";

std::string replace_all(std::string text, std::string_view slot,
                        std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return text;
}

bool has_sentinel_line(const std::string& text) {
  std::size_t start = 0;
  for (;;) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line(text.data() + start,
                                (nl == std::string::npos ? text.size() : nl) - start);
    if (line == kSentinel) return true;
    if (nl == std::string::npos) return false;
    start = nl + 1;
  }
}

}  // namespace

const std::vector<TargetSpec>& canonical_targets() {
  static const std::vector<TargetSpec> targets = {
      {"donald_trump", "Donald Trump"},
      {"wearing_masks", "Wearing Masks"},
      {"racial_equality",
       "Racial Equality (such as the Black Lives Matter movement)"},
  };
  return targets;
}

std::optional<TargetSpec> find_canonical_target(std::string_view target_id) {
  for (const TargetSpec& spec : canonical_targets()) {
    if (spec.target_id == target_id) return spec;
  }
  return std::nullopt;
}

TargetSpec make_target_spec(const std::string& target_id,
                            const std::string& display_phrase) {
  if (display_phrase.empty()) {
    throw InputError("target '" + target_id + "': display phrase must be nonempty");
  }
  if (const auto canonical = find_canonical_target(target_id)) {
    if (canonical->display_phrase != display_phrase) {
      throw InputError("target '" + target_id + "' must use the phrasing \"" +
                       canonical->display_phrase + "\"");
    }
  }
  return TargetSpec{target_id, display_phrase};
}

TargetSpec resolve_target(const std::string& target_id) {
  if (const auto canonical = find_canonical_target(target_id)) return *canonical;
  if (!is_valid_target_id(target_id)) {
    throw InputError("invalid target id '" + target_id + "'");
  }
  return TargetSpec{target_id, target_id};
}

const std::string& prompt_template() {
  static const std::string tmpl(kTemplateV1);
  return tmpl;
}

std::string render_prompt(const std::vector<std::string>& tweet_texts,
                          const TargetSpec& target) {
  if (tweet_texts.empty()) throw InputError("render_prompt: empty tweet list");
  if (target.display_phrase.empty()) {
    throw InputError("render_prompt: empty target display phrase");
  }
  for (const std::string& text : tweet_texts) {
    if (has_sentinel_line(text)) {
      throw InputError(
          "render_prompt: tweet text contains the \"END OF TWEETS\" sentinel line");
    }
  }
  std::string block;
  for (std::size_t i = 0; i < tweet_texts.size(); ++i) {
    if (i > 0) block += '\n';
    block += tweet_texts[i];
  }
  // {target} first: the tweet block must never be rescanned for slots.
  std::string out = replace_all(std::string(kTemplateV1), "{target}",
                                target.display_phrase);
  return replace_all(std::move(out), "{tweets}", block);
}

ParsedVote parse_reply(const std::string& raw) {
  std::string s = raw;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  auto is_trailing_punct = [](char c) {
    return c == '.' || c == ',' || c == '!' || c == ';' || c == ':';
  };
  std::size_t begin = 0;
  while (begin < s.size() && is_space(s[begin])) ++begin;
  std::size_t end = s.size();
  while (end > begin && (is_space(s[end - 1]) || is_trailing_punct(s[end - 1]))) --end;
  const std::string word = to_lower(std::string_view(s).substr(begin, end - begin));
  if (word == "support") return ParsedVote{StanceLabel::Support, raw};
  if (word == "against") return ParsedVote{StanceLabel::Against, raw};
  return ParsedVote{std::nullopt, raw};
}

}  // namespace stance
