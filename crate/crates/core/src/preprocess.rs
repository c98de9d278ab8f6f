//! Tweet text cleaning and crypto-relevance filtering.
//!
//! [`clean_tweet`] applies, in order:
//!
//! 1. strip a leading `RT @name:` retweet marker
//! 2. remove `@mentions`
//! 3. remove `http(s)://`, `www.` and bitly links
//! 4. move `#hashtags` into a separate list
//! 5. replace emoticons and emoji with word aliases (`:-))` → `very_happy`)
//! 6. lowercase
//! 7. remove ASCII punctuation, keeping the underscores of alias tokens
//! 8. collapse whitespace
//!
//! Stopwords are kept: "not" carries sentiment.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;
use crate::{Error, Result};

const EMOTICONS_TSV: &str = include_str!("../data/emoticons.tsv");
const EMOJI_TSV: &str = include_str!("../data/emoji.tsv");
const DEFAULT_LEXICON: &str = include_str!("../data/crypto_lexicon.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanTweet {
    pub tweet_id: u64,
    pub clean_text: String,
    pub hashtags: Vec<String>,
    pub is_crypto_relevant: bool,
    pub token_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceMode {
    FilterOn,
    FilterOff,
}

/// Crypto / finance vocabulary used to discard tweets that mention an
/// ambiguous coin name in an unrelated sense.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CryptoLexicon {
    terms: BTreeSet<String>,
    phrases: Vec<Vec<String>>,
}

impl CryptoLexicon {
    /// Parses one term per line; `#` starts a comment.
    pub fn from_text(text: &str) -> Self {
        let mut lex = CryptoLexicon::default();
        for line in text.lines() {
            let term = line.split('#').next().unwrap_or("").trim().to_lowercase();
            if term.is_empty() {
                continue;
            }
            let words: Vec<String> = term.split_whitespace().map(str::to_string).collect();
            if words.len() == 1 {
                lex.terms.insert(term);
            } else {
                lex.phrases.push(words);
            }
        }
        lex
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_text(&text))
    }

    pub fn builtin() -> Self {
        Self::from_text(DEFAULT_LEXICON)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.phrases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len() + self.phrases.len()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.terms.contains(token)
    }

    /// Whole-token match against cleaned text tokens or hashtags.
    pub fn matches(&self, clean_text: &str, hashtags: &[String]) -> bool {
        let tokens: Vec<&str> = clean_text.split_whitespace().collect();
        tokens.iter().any(|t| self.terms.contains(*t))
            || hashtags.iter().any(|h| self.terms.contains(h.as_str()))
            || self.phrases.iter().any(|p| {
                tokens
                    .windows(p.len())
                    .any(|w| w.iter().zip(p).all(|(a, b)| *a == b.as_str()))
            })
    }
}

/// Emoticon and emoji alias tables.
#[derive(Debug, Clone)]
pub struct EmoticonTable {
    // longest pattern first so ":-))" wins over ":-)"
    emoticons: Vec<(String, String)>,
    emoji: HashMap<String, String>,
    max_emoji_chars: usize,
    aliases: HashSet<String>,
}

fn parse_tsv(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .filter_map(|l| {
            let (pat, alias) = l.split_once('\t')?;
            Some((pat.to_string(), alias.trim().to_lowercase()))
        })
        .collect()
}

impl EmoticonTable {
    pub fn from_tsv(emoticons: &str, emoji: &str) -> Self {
        let mut emoticons = parse_tsv(emoticons);
        emoticons.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        let emoji: HashMap<String, String> = parse_tsv(emoji).into_iter().collect();
        let max_emoji_chars = emoji.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        let aliases = emoticons
            .iter()
            .map(|e| e.1.clone())
            .chain(emoji.values().cloned())
            .collect();
        EmoticonTable {
            emoticons,
            emoji,
            max_emoji_chars,
            aliases,
        }
    }

    pub fn builtin() -> &'static EmoticonTable {
        static TABLE: OnceLock<EmoticonTable> = OnceLock::new();
        TABLE.get_or_init(|| EmoticonTable::from_tsv(EMOTICONS_TSV, EMOJI_TSV))
    }

    pub fn is_alias(&self, token: &str) -> bool {
        self.aliases.contains(token)
    }

    pub fn emoji_alias(&self, emoji: &str) -> Option<&str> {
        self.emoji.get(emoji).map(String::as_str)
    }

    fn match_emoticon(&self, text: &str, at: usize) -> Option<(usize, &str)> {
        let rest = &text[at..];
        let prev = text[..at].chars().next_back();
        self.emoticons.iter().find_map(|(pat, alias)| {
            if !rest.starts_with(pat.as_str()) {
                return None;
            }
            let next = rest[pat.len()..].chars().next();
            if next.is_some_and(char::is_alphanumeric) {
                return None;
            }
            let starts_alnum = pat.chars().next().is_some_and(char::is_alphanumeric);
            if starts_alnum && prev.is_some_and(char::is_alphanumeric) {
                return None;
            }
            Some((pat.len(), alias.as_str()))
        })
    }

    fn match_emoji(&self, text: &str, at: usize) -> Option<(usize, &str)> {
        let rest = &text[at..];
        let ends: Vec<usize> = rest
            .char_indices()
            .skip(1)
            .map(|(i, _)| i)
            .chain(std::iter::once(rest.len()))
            .take(self.max_emoji_chars)
            .collect();
        ends.iter()
            .rev()
            .find_map(|&end| self.emoji.get(&rest[..end]).map(|a| (end, a.as_str())))
    }

    /// Replaces each known emoticon / emoji with ` alias ` and deletes
    /// unmapped emoji.
    pub fn map(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len() + 16);
        let mut i = 0;
        while i < text.len() {
            if let Some((len, alias)) = self
                .match_emoticon(text, i)
                .or_else(|| self.match_emoji(text, i))
            {
                out.push(' ');
                out.push_str(alias);
                out.push(' ');
                i += len;
                continue;
            }
            let c = text[i..].chars().next().unwrap();
            if !is_emoji_char(c) {
                out.push(c);
            }
            i += c.len_utf8();
        }
        out
    }
}

/// Pictographic code points, plus the joiners and selectors that glue emoji
/// sequences together.
pub fn is_emoji_char(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2190..=0x21FF
        | 0x2300..=0x23FF
        | 0x2600..=0x27BF
        | 0x2B00..=0x2BFF
        | 0x200D
        | 0x20E3
        | 0xFE00..=0xFE0F
        | 0xE0020..=0xE007F
        | 0x3030
        | 0x303D
        | 0x3297
        | 0x3299)
}

pub fn map_emoticons(text: &str) -> String {
    EmoticonTable::builtin().map(text)
}

struct Patterns {
    retweet: Regex,
    mention: Regex,
    url: Regex,
    hashtag: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        retweet: Regex::new(r"^\s*RT\s+@\w+:?\s*").unwrap(),
        mention: Regex::new(r"@\w+").unwrap(),
        url: Regex::new(r"(?i)\b(?:https?://|www\.|bit\.ly/|bitly\.com/)\S*").unwrap(),
        hashtag: Regex::new(r"#(\w+)").unwrap(),
    })
}

/// Cleans raw tweet text; returns `(clean_text, hashtags)`.
pub fn clean_text_with(raw: &str, table: &EmoticonTable) -> (String, Vec<String>) {
    let p = patterns();
    let text = p.retweet.replace(raw, "");
    let text = p.mention.replace_all(&text, " ");
    let text = p.url.replace_all(&text, " ");
    let hashtags: Vec<String> = p
        .hashtag
        .captures_iter(&text)
        .map(|c| c[1].to_lowercase())
        .collect();
    let text = p.hashtag.replace_all(&text, " ");
    let text = table.map(&text).to_lowercase();

    let tokens: Vec<String> = text
        .split_whitespace()
        .map(|tok| {
            if table.is_alias(tok) {
                tok.to_string()
            } else {
                tok.chars().filter(|c| !c.is_ascii_punctuation()).collect()
            }
        })
        .filter(|t: &String| !t.is_empty())
        .collect();
    (tokens.join(" "), hashtags)
}

pub fn clean_tweet(raw: &TweetRecord, lexicon: &CryptoLexicon) -> CleanTweet {
    let (clean_text, hashtags) = clean_text_with(&raw.text, EmoticonTable::builtin());
    let token_count = clean_text.split_whitespace().count();
    CleanTweet {
        tweet_id: raw.id,
        is_crypto_relevant: lexicon.matches(&clean_text, &hashtags),
        clean_text,
        hashtags,
        token_count,
    }
}

/// Whether a cleaned tweet survives the outlier filter.
pub fn crypto_relevance(clean: &CleanTweet, lexicon: &CryptoLexicon, mode: RelevanceMode) -> bool {
    match mode {
        RelevanceMode::FilterOff => true,
        RelevanceMode::FilterOn => lexicon.matches(&clean.clean_text, &clean.hashtags),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(text: &str) -> TweetRecord {
        TweetRecord::from_json(&serde_json::json!({
            "id": 1, "text": text, "created_at": "2022-03-01T12:00:00Z"
        }))
        .unwrap()
    }

    fn clean(text: &str) -> CleanTweet {
        clean_tweet(&raw(text), &CryptoLexicon::builtin())
    }

    #[test]
    fn stopwords_are_retained() {
        assert_eq!(clean("Bitcoin is not a good investment").clean_text, "bitcoin is not a good investment");
    }

    #[test]
    fn mentions_urls_hashtags() {
        let c = clean("@sarthakj01 buy #DOGECOIN now! https://t.co/x");
        assert_eq!(c.clean_text, "buy now");
        assert_eq!(c.hashtags, vec!["dogecoin"]);
        assert_eq!(c.token_count, 2);
    }

    #[test]
    fn very_happy_emoticon() {
        assert_eq!(clean("so happy :-))").clean_text, "so happy very_happy");
        assert_eq!(map_emoticons(":-))"), " very_happy ");
    }

    #[test]
    fn emoji_lookup() {
        let table = EmoticonTable::builtin();
        assert_eq!(table.emoji_alias("🚀"), Some("rocket"));
        assert_eq!(map_emoticons("🚀🚀"), " rocket  rocket ");
        assert_eq!(map_emoticons("plain text"), "plain text");
    }

    #[test]
    fn unmapped_emoji_deleted() {
        // U+1FAE8 shaking face is not in the table
        assert_eq!(map_emoticons("hm\u{1FAE8}"), "hm");
        // variation selector after a mapped emoji
        assert_eq!(map_emoticons("\u{2764}\u{FE0F}"), " red_heart ");
    }

    #[test]
    fn emoticons_need_boundaries() {
        assert_eq!(map_emoticons("at 10:30"), "at 10:30");
        assert_eq!(map_emoticons("note:pm"), "note:pm");
        assert_eq!(map_emoticons("great:)"), "great happy_face_or_smiley ");
        assert_eq!(map_emoticons("AND: go"), "AND: go");
    }

    #[test]
    fn retweet_marker_stripped() {
        let c = clean("RT @whale_alert: huge $DOGE transfer");
        assert_eq!(c.clean_text, "huge doge transfer");
    }

    #[test]
    fn bitly_and_www_links() {
        assert_eq!(clean("see bit.ly/3xyz and www.example.com/a ok").clean_text, "see and ok");
    }

    #[test]
    fn underscores_outside_aliases_removed() {
        assert_eq!(clean("snake_case very_happy").clean_text, "snakecase very_happy");
    }

    #[test]
    fn empty_after_cleaning() {
        let c = clean("@a @b https://x.y");
        assert_eq!(c.clean_text, "");
        assert_eq!(c.token_count, 0);
    }

    #[test]
    fn lexicon_rejects_sports_avalanche() {
        let lex = CryptoLexicon::builtin();
        assert!(lex.len() >= 60);
        let c = clean("Avalanche wins the football game");
        assert!(!crypto_relevance(&c, &lex, RelevanceMode::FilterOn));
        assert!(crypto_relevance(&c, &lex, RelevanceMode::FilterOff));
        let c = clean("#AVAX to the moon");
        assert_eq!(c.hashtags, vec!["avax"]);
        assert!(crypto_relevance(&c, &lex, RelevanceMode::FilterOn));
    }

    #[test]
    fn lexicon_file_format() {
        let lex = CryptoLexicon::from_text("# comment\nHODL\n\nsmart contract # phrase\n");
        assert!(lex.contains("hodl"));
        assert!(lex.matches("a smart contract audit", &[]));
        assert!(!lex.matches("smart people", &[]));
    }

    #[test]
    fn seeded_relevance_matches_ground_truth() {
        use rand::{Rng, SeedableRng};
        let lex = CryptoLexicon::builtin();
        let terms: Vec<&str> = lex.terms.iter().map(String::as_str).collect();
        let filler = ["the", "game", "was", "great", "snow", "mountain", "team", "win"];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut hits = 0;
        for i in 0..200 {
            let seeded = i % 2 == 0;
            let mut words: Vec<&str> = (0..6).map(|_| filler[rng.random_range(0..filler.len())]).collect();
            if seeded {
                let pos = rng.random_range(0..words.len());
                words[pos] = terms[rng.random_range(0..terms.len())];
            }
            let c = clean(&words.join(" "));
            let got = crypto_relevance(&c, &lex, RelevanceMode::FilterOn);
            assert_eq!(got, seeded, "{}", c.clean_text);
            hits += got as usize;
        }
        assert_eq!(hits, 100);
    }

    fn token() -> impl Strategy<Value = String> {
        prop_oneof![
            "[A-Za-z]{1,8}",
            "#[A-Za-z0-9]{1,8}",
            "@[a-z0-9_]{1,8}",
            "[a-z]{1,5}[!?.,;:'\"()-]{1,2}",
            Just(":-))".to_string()),
            Just(":(".to_string()),
            Just("🚀".to_string()),
            Just("😂".to_string()),
            Just("https://t.co/abc".to_string()),
            "[ÀÉÎÕÜàéîõüßĞİ]{1,3}",
            Just("RT".to_string()),
            Just("_x_".to_string()),
        ]
    }

    proptest! {
        #[test]
        fn cleaning_is_idempotent(words in prop::collection::vec(token(), 0..12)) {
            let first = clean(&words.join(" "));
            let second = clean(&first.clean_text);
            prop_assert_eq!(&first.clean_text, &second.clean_text);
        }

        #[test]
        fn clean_text_invariants(words in prop::collection::vec(token(), 0..12)) {
            let text = words.join(" ");
            let c = clean(&text);
            prop_assert!(!c.clean_text.contains('@'));
            prop_assert!(!c.clean_text.contains('#'));
            prop_assert!(!c.clean_text.contains("://"));
            prop_assert!(!c.clean_text.chars().any(|ch| ch.is_uppercase()));
            let table = EmoticonTable::builtin();
            for tok in c.clean_text.split_whitespace() {
                if !table.is_alias(tok) {
                    prop_assert!(!tok.chars().any(|ch| ch.is_ascii_punctuation()), "{}", tok);
                }
            }
            // every #-token shows up, lowercased, in the hashtag list
            for w in &words {
                if let Some(tag) = w.strip_prefix('#') {
                    prop_assert!(c.hashtags.contains(&tag.to_lowercase()));
                }
            }
        }
    }
}
