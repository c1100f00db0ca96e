#pragma once

#include <string>
#include <unordered_set>

namespace granuscore::words {

// Lowercased lookup sets backing the pinned RuleAnnotator. Frozen: changing
// them invalidates the annotator goldens.
const std::unordered_set<std::string>& stopwords();
const std::unordered_set<std::string>& np_openers();  // determiners/possessives that may start a noun phrase
const std::unordered_set<std::string>& verb_forms();  // lemmas + generated inflections + irregulars
const std::unordered_set<std::string>& abbreviations(); // sentence-internal "xx." forms, no trailing dot

} // namespace granuscore::words
