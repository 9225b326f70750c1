//! Deterministic Penn Treebank part-of-speech tagger.
//!
//! Tagging runs in two passes over each sentence:
//!
//! 1. Every token gets a word class from a closed-class lexicon, an
//!    open-class lexicon (common verbs with their irregular forms, nouns,
//!    adjectives, adverbs), capitalization, or suffix morphology. Unknown
//!    words fall back to `NN`.
//! 2. Ambiguous classes (base verb vs. noun, `-s` plural vs. third person,
//!    `-ed` past vs. participle, `-ing` gerund vs. noun, `that`, `her`,
//!    `more`, particles, ...) are resolved left to right from the already
//!    resolved previous tags and the first-pass guess for the next token.
//!
//! Contractions and possessives are single tokens (see the tokenizer) and
//! take the tag of their host word: `didn't` is `VBD`, `can't` is `MD`,
//! `it's` is `PRP`, `Trump's` is `NNP`.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use super::tokenize::{Token, TokenKind, TokenizedDoc};

pub type Tag = &'static str;

/// The Penn Treebank tagset, including punctuation tags.
pub const PENN_TAGS: &[Tag] = &[
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS",
    "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG",
    "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", ".", ",", ":", "``", "''", "-LRB-", "-RRB-",
    "$", "#",
];

const CLOSED: &[(&str, Tag)] = &[
    // determiners
    ("the", "DT"), ("a", "DT"), ("an", "DT"), ("this", "DT"), ("these", "DT"), ("those", "DT"),
    ("every", "DT"), ("each", "DT"), ("some", "DT"), ("any", "DT"), ("no", "DT"),
    ("another", "DT"), ("either", "DT"), ("neither", "DT"), ("all", "DT"), ("both", "DT"),
    ("half", "DT"), ("that", "DT"),
    // prepositions and subordinators
    ("of", "IN"), ("in", "IN"), ("on", "IN"), ("at", "IN"), ("by", "IN"), ("for", "IN"),
    ("with", "IN"), ("from", "IN"), ("into", "IN"), ("onto", "IN"), ("about", "IN"),
    ("above", "IN"), ("across", "IN"), ("after", "IN"), ("against", "IN"), ("along", "IN"),
    ("amid", "IN"), ("among", "IN"), ("amongst", "IN"), ("around", "IN"), ("as", "IN"),
    ("before", "IN"), ("behind", "IN"), ("below", "IN"), ("beneath", "IN"), ("beside", "IN"),
    ("besides", "IN"), ("between", "IN"), ("beyond", "IN"), ("despite", "IN"), ("during", "IN"),
    ("except", "IN"), ("inside", "IN"), ("like", "IN"), ("near", "IN"), ("outside", "IN"),
    ("over", "IN"), ("per", "IN"), ("since", "IN"), ("than", "IN"), ("throughout", "IN"),
    ("toward", "IN"), ("towards", "IN"), ("under", "IN"), ("underneath", "IN"), ("unlike", "IN"),
    ("until", "IN"), ("till", "IN"), ("upon", "IN"), ("versus", "IN"), ("via", "IN"),
    ("within", "IN"), ("without", "IN"), ("because", "IN"), ("although", "IN"),
    ("though", "IN"), ("while", "IN"), ("whereas", "IN"), ("if", "IN"), ("unless", "IN"),
    ("whether", "IN"), ("once", "IN"), ("up", "IN"), ("down", "IN"), ("out", "IN"),
    ("off", "IN"), ("through", "IN"), ("past", "IN"), ("amidst", "IN"),
    // coordinators
    ("and", "CC"), ("or", "CC"), ("but", "CC"), ("nor", "CC"), ("plus", "CC"), ("&", "CC"),
    ("to", "TO"),
    // modals
    ("can", "MD"), ("could", "MD"), ("may", "MD"), ("might", "MD"), ("must", "MD"),
    ("shall", "MD"), ("should", "MD"), ("will", "MD"), ("would", "MD"), ("ought", "MD"),
    ("cannot", "MD"),
    // pronouns
    ("i", "PRP"), ("you", "PRP"), ("he", "PRP"), ("she", "PRP"), ("it", "PRP"), ("we", "PRP"),
    ("they", "PRP"), ("me", "PRP"), ("him", "PRP"), ("us", "PRP"), ("them", "PRP"),
    ("myself", "PRP"), ("yourself", "PRP"), ("himself", "PRP"), ("herself", "PRP"),
    ("itself", "PRP"), ("ourselves", "PRP"), ("themselves", "PRP"), ("yourselves", "PRP"),
    ("her", "PRP"),
    ("my", "PRP$"), ("your", "PRP$"), ("his", "PRP$"), ("its", "PRP$"), ("our", "PRP$"),
    ("their", "PRP$"),
    // wh-words
    ("which", "WDT"), ("whichever", "WDT"), ("whatever", "WDT"), ("who", "WP"), ("whom", "WP"),
    ("what", "WP"), ("whoever", "WP"), ("whose", "WP$"), ("when", "WRB"), ("where", "WRB"),
    ("why", "WRB"), ("how", "WRB"), ("whenever", "WRB"), ("wherever", "WRB"),
    ("there", "EX"),
    // auxiliaries
    ("be", "VB"), ("am", "VBP"), ("is", "VBZ"), ("are", "VBP"), ("was", "VBD"), ("were", "VBD"),
    ("been", "VBN"), ("being", "VBG"), ("have", "VBP"), ("has", "VBZ"), ("had", "VBD"),
    ("having", "VBG"), ("do", "VBP"), ("does", "VBZ"), ("did", "VBD"), ("done", "VBN"),
    ("doing", "VBG"),
    // number words
    ("one", "CD"), ("two", "CD"), ("three", "CD"), ("four", "CD"), ("five", "CD"),
    ("six", "CD"), ("seven", "CD"), ("eight", "CD"), ("nine", "CD"), ("ten", "CD"),
    ("eleven", "CD"), ("twelve", "CD"), ("thirteen", "CD"), ("fifteen", "CD"), ("twenty", "CD"),
    ("thirty", "CD"), ("forty", "CD"), ("fifty", "CD"), ("sixty", "CD"), ("seventy", "CD"),
    ("eighty", "CD"), ("ninety", "CD"), ("hundred", "CD"), ("thousand", "CD"),
    ("million", "CD"), ("billion", "CD"), ("trillion", "CD"), ("dozen", "CD"),
    // comparatives and superlatives
    ("more", "JJR"), ("less", "JJR"), ("fewer", "JJR"), ("better", "JJR"), ("worse", "JJR"),
    ("most", "JJS"), ("least", "JJS"), ("best", "JJS"), ("worst", "JJS"),
    ("earlier", "RBR"), ("further", "RBR"),
    // interjections
    ("yes", "UH"), ("oh", "UH"), ("ok", "UH"), ("okay", "UH"), ("hey", "UH"), ("wow", "UH"),
    ("please", "UH"),
];

/// Verbs whose past and participle forms are irregular: (base, past, participle).
const IRREGULAR_VERBS: &[(&str, &str, &str)] = &[
    ("say", "said", "said"), ("make", "made", "made"), ("go", "went", "gone"),
    ("take", "took", "taken"), ("come", "came", "come"), ("see", "saw", "seen"),
    ("know", "knew", "known"), ("get", "got", "gotten"), ("give", "gave", "given"),
    ("find", "found", "found"), ("think", "thought", "thought"), ("tell", "told", "told"),
    ("become", "became", "become"), ("leave", "left", "left"), ("feel", "felt", "felt"),
    ("put", "put", "put"), ("bring", "brought", "brought"), ("begin", "began", "begun"),
    ("keep", "kept", "kept"), ("hold", "held", "held"), ("write", "wrote", "written"),
    ("stand", "stood", "stood"), ("hear", "heard", "heard"), ("let", "let", "let"),
    ("mean", "meant", "meant"), ("set", "set", "set"), ("meet", "met", "met"),
    ("run", "ran", "run"), ("pay", "paid", "paid"), ("sit", "sat", "sat"),
    ("speak", "spoke", "spoken"), ("lead", "led", "led"), ("read", "read", "read"),
    ("grow", "grew", "grown"), ("lose", "lost", "lost"), ("fall", "fell", "fallen"),
    ("send", "sent", "sent"), ("build", "built", "built"), ("understand", "understood", "understood"),
    ("draw", "drew", "drawn"), ("break", "broke", "broken"), ("spend", "spent", "spent"),
    ("cut", "cut", "cut"), ("rise", "rose", "risen"), ("drive", "drove", "driven"),
    ("buy", "bought", "bought"), ("wear", "wore", "worn"), ("choose", "chose", "chosen"),
    ("seek", "sought", "sought"), ("throw", "threw", "thrown"), ("catch", "caught", "caught"),
    ("deal", "dealt", "dealt"), ("win", "won", "won"), ("fight", "fought", "fought"),
    ("sell", "sold", "sold"), ("teach", "taught", "taught"), ("eat", "ate", "eaten"),
    ("fly", "flew", "flown"), ("forget", "forgot", "forgotten"), ("hide", "hid", "hidden"),
    ("hit", "hit", "hit"), ("hurt", "hurt", "hurt"), ("shoot", "shot", "shot"),
    ("steal", "stole", "stolen"), ("strike", "struck", "struck"), ("swear", "swore", "sworn"),
    ("sing", "sang", "sung"), ("sleep", "slept", "slept"), ("shut", "shut", "shut"),
    ("spread", "spread", "spread"), ("quit", "quit", "quit"), ("cost", "cost", "cost"),
    ("bet", "bet", "bet"), ("split", "split", "split"), ("forgive", "forgave", "forgiven"),
    ("lend", "lent", "lent"), ("bear", "bore", "born"), ("bind", "bound", "bound"),
    ("feed", "fed", "fed"), ("flee", "fled", "fled"), ("freeze", "froze", "frozen"),
    ("hang", "hung", "hung"), ("lay", "laid", "laid"), ("lie", "lay", "lain"),
    ("light", "lit", "lit"), ("ride", "rode", "ridden"), ("ring", "rang", "rung"),
    ("seek", "sought", "sought"), ("shake", "shook", "shaken"), ("shine", "shone", "shone"),
    ("sink", "sank", "sunk"), ("slide", "slid", "slid"), ("stick", "stuck", "stuck"),
    ("sting", "stung", "stung"), ("swim", "swam", "swum"), ("swing", "swung", "swung"),
    ("tear", "tore", "torn"), ("wake", "woke", "woken"), ("weep", "wept", "wept"),
    ("withdraw", "withdrew", "withdrawn"), ("undergo", "underwent", "undergone"),
    ("overcome", "overcame", "overcome"), ("mislead", "misled", "misled"),
    ("upset", "upset", "upset"), ("broadcast", "broadcast", "broadcast"),
    ("forecast", "forecast", "forecast"), ("shed", "shed", "shed"), ("bid", "bid", "bid"),
];

/// Regular verbs (base forms). Inflections are recognised by suffix stripping.
const REGULAR_VERBS: &[&str] = &[
    "ask", "work", "seem", "call", "try", "need", "want", "use", "look", "help", "talk", "turn",
    "start", "move", "like", "live", "believe", "happen", "include", "continue", "change", "play",
    "provide", "allow", "add", "expect", "create", "open", "walk", "offer", "remember", "love",
    "consider", "appear", "wait", "serve", "die", "stay", "report", "decide", "pull", "reach",
    "kill", "raise", "pass", "require", "remain", "suggest", "claim", "accuse", "deny", "confirm",
    "announce", "arrest", "charge", "release", "reveal", "respond", "warn", "urge",
    "investigate", "approve", "reject", "support", "oppose", "vote", "sign", "ban", "block",
    "launch", "post", "share", "tweet", "spot", "date", "marry", "divorce", "cancel",
    "criticize", "criticise", "blame", "attack", "injure", "protest", "gather", "express",
    "publish", "remove", "delete", "edit", "view", "watch", "film", "record", "earn", "thank",
    "affect", "struggle", "visit", "rule", "violate", "leak", "head", "plan", "hope", "fear",
    "admit", "insist", "argue", "explain", "describe", "mention", "note", "state", "declare",
    "refuse", "agree", "join", "face", "cause", "force", "push", "stop", "end", "finish", "fail",
    "manage", "question", "doubt", "prove", "discover", "learn", "check", "realize", "realise",
    "notice", "suspect", "intend", "prepare", "promise", "threaten", "demand", "request",
    "receive", "accept", "sue", "settle", "owe", "invest", "fund", "cover", "hire", "fire",
    "resign", "retire", "elect", "nominate", "appoint", "replace", "lower", "increase",
    "decrease", "drop", "jump", "surge", "soar", "plunge", "slow", "rank", "target", "surround",
    "damage", "destroy", "save", "rescue", "escape", "travel", "arrive", "return", "enter",
    "attend", "host", "perform", "beat", "compete", "score", "celebrate", "honor", "praise",
    "slam", "mock", "joke", "laugh", "cry", "smile", "kiss", "hug", "pose", "wed", "welcome",
    "sound", "trust", "verify", "examine", "review", "test", "treat", "infect", "vaccinate",
    "contain", "close", "reopen", "lift", "impose", "restrict", "enforce", "collect", "count",
    "calculate", "estimate", "predict", "compare", "differ", "matter", "depend", "involve",
    "concern", "worry", "bother", "anger", "shock", "surprise", "impress", "inspire",
    "encourage", "influence", "shape", "define", "mark", "label", "list", "name", "identify",
    "recognize", "quote", "cite", "link", "connect", "relate", "tie", "assume", "seize",
    "shout", "scream", "yell", "answer", "reply", "comment", "insult", "threat", "order",
    "command", "control", "govern", "lead", "protect", "defend", "guard", "warn", "alert",
    "inform", "notify", "advise", "recommend", "propose", "pledge", "vow", "commit", "deliver",
    "produce", "direct", "star", "feature", "debut", "premiere", "air", "stream", "sing",
    "dance", "act", "pretend", "imagine", "dream", "wish", "prefer", "hate", "enjoy", "miss",
    "kick", "punch", "push", "pick", "drop", "touch", "grab", "carry", "bury", "fix", "solve",
    "handle", "process", "pursue", "chase", "follow", "track", "monitor", "observe", "detect",
    "reveal", "expose", "uncover", "disclose", "hack", "steal", "threaten", "terrorize",
    "murder", "rape", "rob", "assault", "abuse", "harass", "exploit", "cheat", "lie", "fake",
    "fabricate", "invent", "spread", "circulate", "debunk", "fact-check", "correct", "retract",
    "apologize", "apologise", "resign", "step", "quit", "ensure", "improve", "reduce", "expand",
    "extend", "limit", "boost", "cut", "hike", "tax", "regulate", "legalize", "outlaw",
    "pardon", "convict", "sentence", "jail", "imprison", "acquit", "indict", "prosecute",
    "testify", "plead", "appeal", "overturn", "uphold", "strike", "veto", "pass", "introduce",
    "debate", "discuss", "negotiate", "sanction", "invade", "bomb", "kill", "die", "survive",
    "suffer", "recover", "hospitalize", "diagnose", "cure", "heal", "test", "confirm",
    "happen", "occur", "emerge", "develop", "evolve", "spark", "trigger", "prompt", "fuel",
    "ignite", "believe", "clarify", "study", "research", "show", "tell", "add", "visit",
];

const NOUNS: &[&str] = &[
    "time", "year", "people", "way", "day", "man", "woman", "child", "world", "life", "hand",
    "part", "place", "case", "week", "company", "system", "program", "work", "government",
    "number", "night", "point", "home", "water", "room", "mother", "area", "money", "story",
    "fact", "month", "lot", "right", "book", "eye", "job", "word", "business", "issue", "side",
    "kind", "head", "house", "service", "friend", "father", "power", "hour", "game", "line",
    "member", "law", "car", "city", "community", "president", "team", "minute", "idea", "kid",
    "body", "information", "school", "face", "level", "office", "door", "health", "person",
    "art", "war", "history", "party", "result", "morning", "reason", "girl", "guy",
    "moment", "teacher", "force", "education", "news", "police", "election", "country",
    "source", "statement", "article", "video", "photo", "star", "film", "movie", "actor",
    "actress", "singer", "fan", "couple", "wife", "husband", "baby", "family", "wedding",
    "relationship", "rumor", "magazine", "interview", "season", "album", "event", "death",
    "deal", "plan", "budget", "bill", "court", "judge", "trial", "economy", "market", "price",
    "evidence", "crisis", "policy", "security", "leader", "senator", "administration",
    "department", "agency", "spokesman", "spokeswoman", "spokesperson", "reporter",
    "journalist", "website", "effect", "representative", "anyone", "someone",
    "everyone", "nobody", "somebody", "everybody", "anybody", "nothing", "something",
    "everything", "anything", "thing", "evening", "king", "spring", "string", "ceiling",
    "building", "meeting", "opening", "weekend", "today", "tonight", "tomorrow", "yesterday",
    "percent", "%", "comment", "request", "fraud", "vaccine", "virus", "anger", "incident",
    "outbreak", "fire", "photographer", "constitution", "employee", "press", "decision",
    "town", "network", "rapper", "tourist", "area", "action", "measure", "planet", "governor",
    "restriction", "voter", "victim", "restaurant", "journal", "mistake", "lawyer", "man",
    "information", "officer", "official", "study", "show", "report", "claim", "state", "vote",
    "attack", "record", "film", "post", "charge", "question", "order", "control", "support",
];

/// Irregular plurals and mass nouns Penn tags as NNS.
const PLURAL_NOUNS: &[&str] = &[
    "people", "men", "women", "children", "media", "police", "feet", "teeth", "mice", "data",
    "criteria", "phenomena", "staff",
];

const ADJECTIVES: &[&str] = &[
    "new", "old", "good", "bad", "great", "big", "small", "large", "long", "high", "low",
    "young", "other", "same", "different", "first", "last", "next", "few", "many", "several",
    "own", "political", "public", "former", "federal", "national", "local", "real", "fake",
    "false", "true", "free", "full", "major", "important", "recent", "early", "late", "little",
    "sure", "able", "latest", "top", "social", "economic", "white", "black", "red", "dead",
    "clear", "unclear", "possible", "impossible", "likely", "unlikely", "hard", "human", "whole",
    "private", "special", "certain", "uncertain", "strong", "weak", "military", "foreign",
    "senior", "financial", "international", "poor", "rich", "huge", "serious", "entire", "wrong",
    "ready", "similar", "single", "simple", "available", "nuclear", "popular", "legal",
    "illegal", "personal", "longtime", "appropriate", "inappropriate", "warm", "cold", "hot",
    "cool", "fast", "slow", "quick", "safe", "dangerous", "happy", "sad", "angry", "afraid",
    "aware", "alive", "alone", "such", "main", "key", "past", "current", "future", "final",
    "whole", "fair", "unfair", "fine", "nice", "best", "close", "far", "easy", "difficult",
    "due", "direct", "open", "short", "tall", "deep", "wide", "heavy", "light", "dark", "bright",
    "civil", "medical", "anonymous", "ridiculous", "obvious", "fresh", "wild", "kind", "brave",
    "bold", "calm", "crazy", "fierce", "proud", "rare", "rough", "smart", "tough", "vast",
    "odd", "empty", "busy", "pretty", "ugly", "holy", "daily", "weekly", "monthly", "yearly",
    "friendly", "elderly", "lonely", "lovely", "costly", "deadly", "only", "chief", "prime",
    "total", "complete", "correct", "exact", "accurate", "private", "separate", "moderate",
    "ultimate", "desperate", "adequate", "immediate", "corporate", "senate",
];

const ADVERBS: &[&str] = &[
    "not", "also", "very", "too", "so", "just", "only", "even", "still", "already", "now",
    "then", "here", "ago", "again", "never", "always", "often", "ever", "perhaps", "almost",
    "quite", "rather", "soon", "yet", "later", "however", "instead", "together", "away", "back",
    "else", "well", "enough", "twice", "sometimes", "nevertheless", "meanwhile", "moreover",
    "furthermore", "therefore", "thus", "indeed", "maybe", "somewhat", "nearly", "abroad",
    "ahead", "apart", "aside", "overseas", "online", "forward", "anyway", "otherwise", "much",
    "n't", "hence", "before",
];

/// Contractions tagged by their host word.
const CONTRACTIONS: &[(&str, Tag)] = &[
    ("can't", "MD"), ("won't", "MD"), ("ain't", "VBP"), ("shan't", "MD"), ("let's", "VB"),
    ("i'm", "PRP"), ("it's", "PRP"), ("he's", "PRP"), ("she's", "PRP"), ("that's", "DT"),
    ("there's", "EX"), ("what's", "WP"), ("who's", "WP"), ("where's", "WRB"),
    ("here's", "RB"), ("how's", "WRB"),
];

struct Lexicon {
    closed: HashMap<&'static str, Tag>,
    past: HashSet<&'static str>,
    participle: HashSet<&'static str>,
    verb_bases: HashSet<&'static str>,
    nouns: HashSet<&'static str>,
    plural_nouns: HashSet<&'static str>,
    adjectives: HashSet<&'static str>,
    adverbs: HashSet<&'static str>,
    contractions: HashMap<&'static str, Tag>,
}

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| {
        let mut verb_bases: HashSet<&str> = REGULAR_VERBS.iter().copied().collect();
        let mut past = HashSet::new();
        let mut participle = HashSet::new();
        for &(base, p, pp) in IRREGULAR_VERBS {
            verb_bases.insert(base);
            past.insert(p);
            participle.insert(pp);
        }
        Lexicon {
            closed: CLOSED.iter().copied().collect(),
            past,
            participle,
            verb_bases,
            nouns: NOUNS.iter().copied().collect(),
            plural_nouns: PLURAL_NOUNS.iter().copied().collect(),
            adjectives: ADJECTIVES.iter().copied().collect(),
            adverbs: ADVERBS.iter().copied().collect(),
            contractions: CONTRACTIONS.iter().copied().collect(),
        }
    })
}

/// First-pass word class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Fixed(Tag),
    /// Known verb base form: VB, VBP or NN.
    BaseVerb { noun: bool },
    /// `-s` form: NNS or (when the stem is a verb) VBZ.
    SForm { verb: bool },
    /// VBD or VBN.
    EdForm,
    /// VBG or NN.
    IngForm,
}

impl Class {
    fn guess(self) -> Tag {
        match self {
            Class::Fixed(t) => t,
            Class::BaseVerb { noun: true } => "NN",
            Class::BaseVerb { noun: false } => "VB",
            Class::SForm { .. } => "NNS",
            Class::EdForm => "VBD",
            Class::IngForm => "VBG",
        }
    }
}

fn punct_tag(t: &Token, first: bool) -> Tag {
    match t.text.as_str() {
        "." | "!" | "?" => ".",
        "," => ",",
        ":" | ";" | "-" | "\u{2013}" | "\u{2014}" | "\u{2026}" => ":",
        "(" | "[" | "{" => "-LRB-",
        ")" | "]" | "}" => "-RRB-",
        "$" | "\u{20AC}" | "\u{00A3}" => "$",
        "#" => "#",
        "%" => "NN",
        "&" => "CC",
        "\u{201C}" | "\u{2018}" => "``",
        "\u{201D}" | "\u{2019}" => "''",
        "\"" | "'" | "`" => {
            if first || t.space_before {
                "``"
            } else {
                "''"
            }
        }
        _ => "SYM",
    }
}

fn strip_possessive(lw: &str) -> Option<&str> {
    for suffix in ["'s", "\u{2019}s"] {
        if let Some(host) = lw.strip_suffix(suffix) {
            if !host.is_empty() {
                return Some(host);
            }
        }
    }
    None
}

fn ed_stems(w: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(s) = w.strip_suffix("ied") {
        out.push(format!("{s}y"));
    }
    if let Some(s) = w.strip_suffix("ed") {
        out.push(s.to_string());
        let b = s.as_bytes();
        if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
            out.push(s[..s.len() - 1].to_string());
        }
    }
    if let Some(s) = w.strip_suffix('d') {
        out.push(s.to_string());
    }
    out
}

fn ing_stems(w: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(s) = w.strip_suffix("ing") {
        out.push(s.to_string());
        out.push(format!("{s}e"));
        let b = s.as_bytes();
        if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
            out.push(s[..s.len() - 1].to_string());
        }
        if let Some(t) = s.strip_suffix('y') {
            out.push(format!("{t}ie"));
        }
    }
    out
}

fn s_stems(w: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(s) = w.strip_suffix("ies") {
        out.push(format!("{s}y"));
    }
    if let Some(s) = w.strip_suffix("es") {
        out.push(s.to_string());
    }
    if let Some(s) = w.strip_suffix('s') {
        out.push(s.to_string());
    }
    out
}

fn comparative_of_adjective(lex: &Lexicon, w: &str) -> Option<Tag> {
    for (suffix, tag) in [("er", "JJR"), ("est", "JJS")] {
        if let Some(stem) = w.strip_suffix(suffix) {
            let b = stem.as_bytes();
            let mut candidates = vec![stem.to_string(), format!("{stem}e")];
            if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
                candidates.push(stem[..stem.len() - 1].to_string());
            }
            if let Some(t) = stem.strip_suffix('i') {
                candidates.push(format!("{t}y"));
            }
            if candidates.iter().any(|c| lex.adjectives.contains(c.as_str())) {
                return Some(tag);
            }
        }
    }
    None
}

const NOUN_SUFFIXES: &[&str] = &[
    "tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship", "ism", "ist", "er", "or",
    "age", "ure", "dom", "hood", "cy", "ery", "ee", "eer",
];
const ADJ_SUFFIXES: &[&str] = &[
    "ous", "ful", "ive", "able", "ible", "al", "ic", "ical", "less", "ish", "ary", "ant",
];

/// Class of a lowercase word from morphology alone.
fn morphology(lex: &Lexicon, lw: &str) -> Option<Class> {
    let n = lw.chars().count();
    if lw.chars().any(|c| c.is_ascii_digit()) {
        return Some(Class::Fixed(
            if lw.ends_with('s') || lw.chars().filter(char::is_ascii_digit).count() * 2 >= n {
                "CD"
            } else {
                "JJ"
            },
        ));
    }
    if n > 3 && lw.ends_with("ly") {
        return Some(Class::Fixed("RB"));
    }
    if n > 4 && lw.ends_with("ing") {
        return Some(Class::IngForm);
    }
    if n > 3 && lw.ends_with("ed") {
        return Some(Class::EdForm);
    }
    if let Some(tag) = comparative_of_adjective(lex, lw) {
        return Some(Class::Fixed(tag));
    }
    if n > 3 && lw.ends_with('s') && !lw.ends_with("ss") && !lw.ends_with("us") && !lw.ends_with("is") {
        let verb = s_stems(lw).iter().any(|s| lex.verb_bases.contains(s.as_str()));
        return Some(Class::SForm { verb });
    }
    if n > 4 && ADJ_SUFFIXES.iter().any(|s| lw.ends_with(s)) {
        return Some(Class::Fixed("JJ"));
    }
    if n > 4 && NOUN_SUFFIXES.iter().any(|s| lw.ends_with(s)) {
        return Some(Class::Fixed("NN"));
    }
    if n > 4 && ["ize", "ise", "ify"].iter().any(|s| lw.ends_with(s)) {
        return Some(Class::BaseVerb { noun: false });
    }
    None
}

/// Class from the lexicon only (no capitalization or default handling).
fn lookup(lex: &Lexicon, lw: &str) -> Option<Class> {
    if let Some(&t) = lex.contractions.get(lw) {
        return Some(Class::Fixed(t));
    }
    if let Some(host) = lw.strip_suffix("n't").or_else(|| lw.strip_suffix("n\u{2019}t")) {
        if let Some(&t) = lex.closed.get(host) {
            return Some(Class::Fixed(t));
        }
    }
    for suffix in ["'m", "'re", "'ve", "'ll", "'d", "\u{2019}m", "\u{2019}re", "\u{2019}ve", "\u{2019}ll", "\u{2019}d"] {
        if let Some(host) = lw.strip_suffix(suffix) {
            if let Some(&t) = lex.closed.get(host) {
                return Some(Class::Fixed(t));
            }
        }
    }
    if let Some(&t) = lex.closed.get(lw) {
        return Some(Class::Fixed(t));
    }
    if lex.plural_nouns.contains(lw) {
        return Some(Class::Fixed("NNS"));
    }
    let is_past = lex.past.contains(lw);
    let is_part = lex.participle.contains(lw);
    let is_base = lex.verb_bases.contains(lw);
    match (is_base, is_past, is_part) {
        (_, true, true) => return Some(Class::EdForm),
        (false, true, false) => return Some(Class::Fixed("VBD")),
        (false, false, true) => return Some(Class::Fixed("VBN")),
        (true, _, _) => {
            return Some(Class::BaseVerb {
                noun: lex.nouns.contains(lw),
            })
        }
        _ => {}
    }
    if lex.adverbs.contains(lw) {
        return Some(Class::Fixed("RB"));
    }
    if lex.adjectives.contains(lw) {
        return Some(Class::Fixed("JJ"));
    }
    if lex.nouns.contains(lw) {
        return Some(Class::Fixed("NN"));
    }
    if lw.ends_with("ed") && ed_stems(lw).iter().any(|s| lex.verb_bases.contains(s.as_str())) {
        return Some(Class::EdForm);
    }
    if lw.ends_with("ing") && ing_stems(lw).iter().any(|s| lex.verb_bases.contains(s.as_str())) {
        return Some(Class::IngForm);
    }
    if lw.ends_with('s') {
        let stems = s_stems(lw);
        if stems.iter().any(|s| lex.verb_bases.contains(s.as_str())) {
            return Some(Class::SForm { verb: true });
        }
        if stems
            .iter()
            .any(|s| lex.nouns.contains(s.as_str()) || lex.adjectives.contains(s.as_str()))
        {
            return Some(Class::SForm { verb: false });
        }
    }
    None
}

fn classify(lex: &Lexicon, tok: &Token, sentence_initial: bool) -> Class {
    match tok.kind {
        TokenKind::Number => return Class::Fixed("CD"),
        TokenKind::Punct => return Class::Fixed(punct_tag(tok, sentence_initial)),
        TokenKind::Word => {}
    }
    let lw = tok.lower();
    let (lw, possessive) = match lex.contractions.contains_key(lw.as_str()) {
        true => (lw, false),
        false => match strip_possessive(&lw) {
            Some(host) => (host.to_string(), true),
            None => (lw, false),
        },
    };
    let capitalized = tok.text.chars().next().is_some_and(char::is_uppercase);
    let closed = lex.closed.contains_key(lw.as_str()) || lex.contractions.contains_key(lw.as_str());

    if capitalized && !closed && (!sentence_initial || tok.is_all_caps()) {
        let known = lookup(lex, &lw);
        // ALL-CAPS emphasis of an ordinary word keeps its lexical class.
        if tok.is_all_caps() && sentence_initial_or_emphasis(known) {
            return known.unwrap();
        }
        return Class::Fixed("NNP");
    }
    if let Some(c) = lookup(lex, &lw) {
        return if possessive { Class::Fixed(c.guess()) } else { c };
    }
    match morphology(lex, &lw) {
        Some(c) if possessive => Class::Fixed(c.guess()),
        Some(c) => c,
        None if capitalized => Class::Fixed("NNP"),
        None => Class::Fixed("NN"),
    }
}

fn sentence_initial_or_emphasis(known: Option<Class>) -> bool {
    known.is_some()
}

fn is_be_or_have(w: &str) -> bool {
    matches!(
        w,
        "be" | "am" | "is" | "are" | "was" | "were" | "been" | "being" | "has" | "have" | "had"
            | "having" | "get" | "gets" | "got" | "gotten" | "getting" | "'s" | "isn't"
            | "aren't" | "wasn't" | "weren't" | "hasn't" | "haven't" | "hadn't"
    )
}

fn is_do_form(w: &str) -> bool {
    matches!(
        w,
        "do" | "does" | "did" | "don't" | "doesn't" | "didn't" | "don\u{2019}t" | "doesn\u{2019}t"
            | "didn\u{2019}t"
    )
}

fn is_verb_tag(t: Tag) -> bool {
    t.starts_with("VB") || t == "MD"
}

fn is_nominal_modifier(t: Tag) -> bool {
    matches!(t, "DT" | "JJ" | "JJR" | "JJS" | "PRP$" | "POS" | "CD" | "PDT")
}

fn is_noun_like(t: Tag) -> bool {
    matches!(t, "NN" | "NNS" | "NNP" | "NNPS" | "JJ" | "CD" | "VBG" | "JJR" | "JJS")
}

const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "we", "they"];
const SINGULAR_PRONOUNS: &[&str] = &["he", "she", "it", "this", "that"];

fn tag_sentence(lex: &Lexicon, toks: &[Token]) -> Vec<Tag> {
    let classes: Vec<Class> = toks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let initial = toks[..i].iter().all(|p| p.is_punct() && p.text != ",");
            classify(lex, t, initial)
        })
        .collect();
    let lowers: Vec<String> = toks.iter().map(Token::lower).collect();
    let mut tags: Vec<Tag> = Vec::with_capacity(toks.len());

    for i in 0..toks.len() {
        let prev = i.checked_sub(1).map(|j| tags[j]);
        let prev_w = i.checked_sub(1).map(|j| lowers[j].as_str()).unwrap_or("");
        let next = classes.get(i + 1).map(|c| c.guess());
        let next_w = lowers.get(i + 1).map(String::as_str).unwrap_or("");
        // nearest preceding non-adverb token
        let mut k = i;
        while k > 0 && tags[k - 1] == "RB" {
            k -= 1;
        }
        let before_adv = k.checked_sub(1).map(|j| (tags[j], lowers[j].as_str()));

        let tag = match classes[i] {
            Class::Fixed(t) if toks[i].kind == TokenKind::Word => {
                resolve_closed(&lowers[i], t, prev, next, next_w)
            }
            Class::Fixed(t) => t,
            Class::BaseVerb { noun } => {
                let prev2 = i.checked_sub(2).map(|j| tags[j]);
                match (prev, before_adv) {
                    (Some("TO") | Some("MD"), _) => "VB",
                    (_, Some(("TO", _))) | (_, Some(("MD", _))) => "VB",
                    (_, Some((_, w))) if is_do_form(w) => "VB",
                    (Some("PRP") | Some("NN") | Some("NNP"), _)
                        if matches!(prev2, Some("MD"))
                            || i >= 2 && is_do_form(&lowers[i - 2]) =>
                    {
                        "VB"
                    }
                    (Some(p), _) if is_nominal_modifier(p) => "NN",
                    (Some("PRP"), _) if SUBJECT_PRONOUNS.contains(&prev_w) => "VBP",
                    (Some("NNS") | Some("NNPS") | Some("WDT") | Some("WP"), _) => "VBP",
                    (Some("IN"), _) => "NN",
                    (Some("CC") | Some(","), _) => {
                        let last_verb = tags.iter().rev().find(|t| is_verb_tag(t)).copied();
                        match last_verb {
                            Some("VB") => "VB",
                            Some("VBP") => "VBP",
                            _ if noun => "NN",
                            _ => "VB",
                        }
                    }
                    (Some(p), _) if is_verb_tag(p) => "NN",
                    (None, _) => "VB",
                    _ if noun => "NN",
                    _ => "VB",
                }
            }
            Class::SForm { verb } => {
                let subject = matches!(prev, Some("NN") | Some("NNP") | Some("WDT") | Some("WP") | Some("EX"))
                    || (prev == Some("PRP") && SINGULAR_PRONOUNS.contains(&prev_w))
                    || (prev == Some("RB")
                        && matches!(before_adv, Some(("NN" | "NNP" | "PRP" | "WDT", _))));
                let after_comma = prev == Some(",")
                    && matches!(next, Some("DT") | Some("PRP$") | Some("PRP"));
                if verb && (subject || after_comma) {
                    "VBZ"
                } else {
                    "NNS"
                }
            }
            Class::EdForm => match (prev, before_adv) {
                // put, cut, hit: base form after a modal, `to` or `do`
                (_, Some(("MD" | "TO", _))) if lex.verb_bases.contains(lowers[i].as_str()) => "VB",
                (_, Some((_, w))) if is_do_form(w) && lex.verb_bases.contains(lowers[i].as_str()) => "VB",
                (_, Some((_, w))) if is_be_or_have(w) => "VBN",
                (Some(p), _) if matches!(p, "DT" | "PRP$" | "POS") => "VBN",
                (Some("NN") | Some("NNS"), _) if next_w == "by" => "VBN",
                (None, _) => "VBN",
                _ => "VBD",
            },
            Class::IngForm => match prev {
                Some(p) if matches!(p, "DT" | "PRP$" | "POS" | "JJ") => "NN",
                _ => "VBG",
            },
        };
        tags.push(tag);
    }
    tags
}

fn resolve_closed(lw: &str, t: Tag, prev: Option<Tag>, next: Option<Tag>, next_w: &str) -> Tag {
    let next_is_end = next.is_none_or(|n| matches!(n, "." | "," | ":" | "''"));
    match lw {
        "that" => match (prev, next) {
            (Some(p), _) if is_verb_tag(p) => "IN",
            (_, Some("DT" | "PRP" | "PRP$" | "NNP" | "EX")) => "IN",
            (_, Some(n)) if is_verb_tag(n) => "WDT",
            (Some("NN" | "NNS"), _) => "IN",
            _ => "DT",
        },
        "more" | "less" => match next {
            Some("JJ" | "RB") => "RBR",
            _ => "JJR",
        },
        "most" | "least" => match next {
            Some("JJ" | "RB") => "RBS",
            _ => "JJS",
        },
        "all" | "both" | "half" => match next {
            Some("DT" | "PRP$") => "PDT",
            _ => t,
        },
        "such" => match next {
            Some("DT") => "PDT",
            _ => "JJ",
        },
        "there" => {
            if matches!(next_w, "is" | "are" | "was" | "were" | "be" | "been" | "has" | "have" | "had" | "seems" | "seem" | "remains" | "remain" | "exists" | "exist")
                || next == Some("MD")
            {
                "EX"
            } else {
                "RB"
            }
        }
        "her" => match next {
            Some(n) if is_noun_like(n) => "PRP$",
            _ => "PRP",
        },
        "up" | "down" | "out" | "off" | "through" => match prev {
            Some(p) if is_verb_tag(p) => "RP",
            _ => "IN",
        },
        "before" | "after" | "since" | "over" if next_is_end => "RB",
        "so" if next_w == "that" => "IN",
        _ => t,
    }
}

/// Tags every token of `doc`; the output is aligned with `doc.tokens()`.
pub fn pos_tag(doc: &TokenizedDoc) -> Vec<Tag> {
    let lex = lexicon();
    let mut out = Vec::with_capacity(doc.tokens().len());
    for sentence in doc.sentences() {
        out.extend(tag_sentence(lex, sentence));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textfeat::tokenize::tokenize;

    fn tags(text: &str) -> Vec<Tag> {
        pos_tag(&tokenize(text).unwrap())
    }

    #[test]
    fn closed_class() {
        assert_eq!(tags("the"), ["DT"]);
        assert_eq!(tags("quickly"), ["RB"]);
    }

    #[test]
    fn simple_sentence() {
        assert_eq!(tags("The cats ran"), ["DT", "NNS", "VBD"]);
    }

    #[test]
    fn every_tag_is_penn() {
        let text = "\"Wow!\" she said (again) - it's $5 & #1, isn't it? Mr. O'Neil's 3rd try...";
        for t in tags(text) {
            assert!(PENN_TAGS.contains(&t), "{t}");
        }
    }

    fn accuracy(gold: &str) -> (usize, usize, Vec<String>) {
        let lines: Vec<&str> = gold.lines().filter(|l| !l.starts_with('#')).collect();
        let (mut total, mut correct) = (0usize, 0usize);
        let mut errors = Vec::new();
        for pair in lines.chunks(2) {
            let doc = tokenize(pair[0]).unwrap();
            let expected: Vec<&str> = pair[1].split_whitespace().collect();
            let got = pos_tag(&doc);
            assert_eq!(got.len(), expected.len(), "token count mismatch in {:?}", pair[0]);
            for ((tok, g), e) in doc.tokens().iter().zip(&got).zip(&expected) {
                total += 1;
                if g == e {
                    correct += 1;
                } else {
                    errors.push(format!("{}: {} vs gold {}", tok.text, g, e));
                }
            }
        }
        (correct, total, errors)
    }

    #[test]
    fn gold_corpus_accuracy() {
        let (correct, total, errors) = accuracy(include_str!("../../data/pos_gold.txt"));
        let acc = correct as f64 / total as f64;
        eprintln!("gold accuracy {correct}/{total} = {acc:.4}; misses: {errors:?}");
        assert!(total >= 500, "gold set has {total} tokens");
        assert!(acc >= 0.90, "accuracy {acc:.3}; errors: {errors:?}");
    }

    #[test]
    fn heldout_accuracy() {
        let (correct, total, errors) = accuracy(include_str!("../../data/pos_heldout.txt"));
        let acc = correct as f64 / total as f64;
        eprintln!("held-out accuracy {correct}/{total} = {acc:.4}; misses: {errors:?}");
        assert!(acc >= 0.85, "accuracy {acc:.3}; errors: {errors:?}");
    }
}
