#include "wordlists.hpp"

#include <array>
#include <string_view>

namespace granuscore::words {

namespace {

constexpr std::string_view kStopwords[] = {
    "a", "an", "the", "and", "or", "but", "nor", "so", "yet", "for", "of", "to", "in", "on",
    "at", "by", "from", "up", "down", "out", "off", "over", "under", "again", "further", "then",
    "once", "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few",
    "more", "most", "other", "some", "such", "no", "not", "only", "own", "same", "than", "too",
    "very", "just", "also", "ever", "never", "always", "often", "however", "thus", "hence",
    "therefore", "moreover", "furthermore", "meanwhile", "nevertheless", "nonetheless", "instead",
    "although", "though", "while", "whereas", "because", "since", "until", "unless", "if", "else",
    "about", "above", "below", "between", "among", "through", "during", "before", "after",
    "against", "into", "onto", "upon", "within", "without", "along", "across", "behind", "beyond",
    "besides", "despite", "toward", "towards", "via", "per", "amid", "around", "near", "with",
    "as", "i", "me", "my", "myself", "we", "us", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "this",
    "that", "these", "those", "what", "which", "who", "whom", "whose", "whoever", "whatever",
    "anyone", "everyone", "someone", "nobody", "anything", "everything", "something", "nothing",
    "one", "ones", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "will", "would", "shall", "should", "can", "could",
    "may", "might", "must", "ought", "dare", "need", "don't", "doesn't", "didn't", "isn't",
    "aren't", "wasn't", "weren't", "hasn't", "haven't", "hadn't", "can't", "cannot", "couldn't",
    "won't", "wouldn't", "shouldn't", "mustn't", "needn't", "it's", "that's", "there's", "here's",
    "what's", "who's", "i'm", "i've", "i'd", "i'll", "we're", "we've", "we'd", "we'll", "you're",
    "you've", "you'd", "you'll", "he's", "he'd", "he'll", "she's", "she'd", "she'll", "they're",
    "they've", "they'd", "they'll", "let's", "etc", "eg", "ie", "et", "al", "vs", "cf", "resp",
    "yes", "no", "ok", "okay", "please", "thanks", "thank", "hello", "hi", "oh", "ah", "hmm",
    "really", "quite", "rather", "almost", "already", "still", "even", "much", "many", "several",
    "either", "neither", "whether", "e.g", "i.e",
};

// Determiners and possessives that open a noun phrase when followed by
// content ("his old wooden chair", "the first 900").
constexpr std::string_view kOpeners[] = {
    "a", "an", "the", "this", "that", "these", "those",
    "my", "your", "his", "her", "its", "our", "their",
};

// Common verb lemmas; inflections are generated below. Everyday and
// scientific-register verbs both matter: the annotator must keep noun
// phrases intact inside paper abstracts as well as ordinary prose.
constexpr std::string_view kVerbLemmas[] = {
    "accept", "achieve", "add", "address", "adopt", "agree", "aim", "allow", "analyze", "analyse",
    "answer", "appear", "apply", "argue", "arrive", "ask", "assess", "assign", "associate",
    "assume", "attempt", "avoid", "base", "believe", "belong", "benefit", "buy", "calculate",
    "call", "capture", "carry", "cause", "change", "check", "claim", "classify", "clean", "close",
    "collect", "combine", "compare", "compute", "conclude", "conduct", "confirm", "connect",
    "consider", "consist", "constrain", "construct", "contain", "continue", "contribute",
    "control", "convert", "correspond", "cover", "create", "decide", "decrease", "define",
    "demonstrate", "denote", "depend", "derive", "describe", "design", "detect", "determine",
    "develop", "differ", "discuss", "divide", "drop", "emphasize", "employ", "enable",
    "encourage", "enjoy", "ensure", "establish", "estimate", "evaluate", "examine", "exceed",
    "exist", "expect", "explain", "explore", "express", "extend", "extract", "facilitate",
    "fail", "finish", "fit", "fix", "focus", "follow", "form", "gather", "generate", "happen",
    "help", "highlight", "identify", "illustrate", "implement", "imply", "improve", "include",
    "incorporate", "increase", "indicate", "infer", "influence", "introduce", "investigate",
    "involve", "jump", "kick", "kill", "land", "laugh", "learn", "like", "limit", "listen",
    "live", "look", "love", "maintain", "manage", "map", "measure", "mention", "model", "modify",
    "move", "name", "note", "notice", "observe", "obtain", "occur", "offer", "open", "operate",
    "outperform", "perform", "pick", "plan", "play", "point", "predict", "prefer", "prepare",
    "present", "preserve", "prevent", "produce", "promise", "propose", "prove", "provide",
    "publish", "push", "quantify", "raise", "rank", "reach", "realize", "receive", "recognize",
    "recommend", "record", "recover", "reduce", "refer", "reflect", "regard", "relate", "release",
    "rely", "remain", "remember", "remove", "replace", "report", "represent", "require",
    "resolve", "rest", "result", "retain", "return", "reveal", "review", "sample", "satisfy",
    "save", "score", "seem", "select", "serve", "share", "show", "sign", "simplify", "skate",
    "smile", "solve", "start", "state", "stay", "stop", "study", "submit", "suffer", "suggest",
    "summarize", "support", "suppose", "tackle", "talk", "tend", "test", "thank", "track",
    "train", "transform", "travel", "treat", "try", "turn", "use", "utilize", "validate",
    "vary", "verify", "visit", "wait", "walk", "want", "watch", "wish", "wonder", "work",
    "yield",
};

// Irregular or suppletive forms the generator cannot reach.
constexpr std::string_view kIrregularVerbForms[] = {
    "arise", "arose", "arisen", "ate", "awake", "awoke", "bear", "bore", "borne", "beat",
    "became", "become", "began", "begin", "begun", "bent", "bend", "bet", "bind", "bound",
    "bit", "bite", "bitten", "blew", "blow", "blown", "break", "broke", "broken", "bring",
    "brought", "build", "built", "bought", "catch", "caught", "came", "choose", "chose",
    "chosen", "come", "cost", "cut", "deal", "dealt", "dig", "dug", "draw", "drawn", "drew",
    "drink", "drank", "drunk", "drive", "driven", "drove", "eat", "eaten", "fall", "fallen",
    "fell", "feed", "fed", "feel", "felt", "fight", "fought", "find", "found", "fly", "flew",
    "flown", "forget", "forgot", "forgotten", "freeze", "froze", "frozen", "gave", "get", "give",
    "given", "go", "goes", "gone", "got", "gotten", "grew", "grow", "grown", "hear", "heard",
    "held", "hide", "hidden", "hid", "hit", "hold", "hurt", "keep", "kept", "knew", "know",
    "known", "lay", "laid", "lead", "led", "leave", "left", "lend", "lent", "let", "lie", "lost",
    "lose", "made", "make", "mean", "meant", "meet", "met", "paid", "pay", "put", "quit",
    "ran", "rang", "read", "ride", "ridden", "ring", "rise", "risen", "rode", "rose", "run",
    "rung", "said", "sang", "sat", "saw", "say", "see", "seek", "seen", "sell", "send", "sent",
    "set", "shake", "shaken", "shook", "shut", "sing", "sink", "sank", "sunk", "sit", "sleep",
    "slept", "sold", "sought", "speak", "spend", "spent", "spoke", "spoken", "spread", "spring",
    "sprang", "stand", "stood", "steal", "stole", "stolen", "stick", "stuck", "strike",
    "struck", "sung", "swam", "swim", "swum", "take", "taken", "taught", "teach", "tear",
    "tell", "think", "thought", "threw", "throw", "thrown", "told", "took", "tore", "torn",
    "understand", "understood", "wake", "wear", "went", "win", "woke", "won", "wore", "worn",
    "write", "written", "wrote",
};

constexpr std::string_view kAbbreviations[] = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "no", "nos", "vol", "vols", "fig",
    "figs", "eq", "eqs", "sec", "secs", "ch", "chs", "p", "pp", "e.g", "i.e", "etc", "vs",
    "cf", "al", "inc", "ltd", "co", "corp", "dept", "univ", "approx", "resp", "ca", "est",
};

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

void add_inflections(std::unordered_set<std::string>& out, std::string_view lemma) {
    std::string base(lemma);
    out.insert(base);
    // third person singular
    if (ends_with(base, "s") || ends_with(base, "x") || ends_with(base, "z") ||
        ends_with(base, "ch") || ends_with(base, "sh")) {
        out.insert(base + "es");
    } else if (ends_with(base, "y") && base.size() > 1 && !is_vowel(base[base.size() - 2])) {
        out.insert(base.substr(0, base.size() - 1) + "ies");
    } else {
        out.insert(base + "s");
    }
    // past / participle / gerund
    if (ends_with(base, "e")) {
        out.insert(base + "d");
        out.insert(base.substr(0, base.size() - 1) + "ing");
    } else if (ends_with(base, "y") && base.size() > 1 && !is_vowel(base[base.size() - 2])) {
        out.insert(base.substr(0, base.size() - 1) + "ied");
        out.insert(base + "ing");
    } else {
        out.insert(base + "ed");
        out.insert(base + "ing");
        // consonant doubling (plan -> planned, stop -> stopping)
        size_t n = base.size();
        if (n >= 3 && !is_vowel(base[n - 1]) && is_vowel(base[n - 2]) && !is_vowel(base[n - 3]) &&
            base[n - 1] != 'w' && base[n - 1] != 'x' && base[n - 1] != 'y') {
            out.insert(base + base[n - 1] + "ed");
            out.insert(base + base[n - 1] + "ing");
        }
    }
}

} // namespace

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> set = [] {
        std::unordered_set<std::string> s;
        for (auto w : kStopwords) s.emplace(w);
        return s;
    }();
    return set;
}

const std::unordered_set<std::string>& np_openers() {
    static const std::unordered_set<std::string> set = [] {
        std::unordered_set<std::string> s;
        for (auto w : kOpeners) s.emplace(w);
        return s;
    }();
    return set;
}

const std::unordered_set<std::string>& verb_forms() {
    static const std::unordered_set<std::string> set = [] {
        std::unordered_set<std::string> s;
        for (auto lemma : kVerbLemmas) add_inflections(s, lemma);
        for (auto form : kIrregularVerbForms) add_inflections(s, form);
        return s;
    }();
    return set;
}

const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> set = [] {
        std::unordered_set<std::string> s;
        for (auto w : kAbbreviations) s.emplace(w);
        return s;
    }();
    return set;
}

} // namespace granuscore::words
