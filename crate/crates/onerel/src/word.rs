//! Words in a finitely generated free group.
//!
//! A letter is a nonzero `i32`: generator `i` (zero-based) is `i + 1`, its
//! inverse is `-(i + 1)`. Words are kept freely reduced by construction, so
//! equality of `Word` values is equality in the free group. `CyclicWord`
//! additionally quotients by rotation (stored as the least rotation), so it
//! represents a conjugacy class of a cyclically reduced word.

use std::fmt;

pub type Letter = i32;

/// Zero-based generator index of a letter.
pub fn gen_index(l: Letter) -> usize {
    debug_assert!(l != 0);
    (l.unsigned_abs() - 1) as usize
}

pub fn letter(gen: usize, positive: bool) -> Letter {
    let v = (gen + 1) as i32;
    if positive {
        v
    } else {
        -v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordError {
    Syntax { pos: usize, what: String },
    UnknownGenerator(char),
    Alphabet(String),
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordError::Syntax { pos, what } => write!(f, "syntax error at byte {pos}: {what}"),
            WordError::UnknownGenerator(c) => write!(f, "unknown generator '{c}'"),
            WordError::Alphabet(msg) => write!(f, "bad alphabet: {msg}"),
        }
    }
}

impl std::error::Error for WordError {}

/// Generator names for parsing and display. One lowercase ASCII letter per
/// generator; uppercase denotes the inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    pub fn new(names: Vec<char>) -> Result<Self, WordError> {
        for &c in &names {
            if !c.is_ascii_lowercase() {
                return Err(WordError::Alphabet(format!(
                    "generator '{c}' is not a lowercase ascii letter"
                )));
            }
        }
        for i in 0..names.len() {
            if names[i + 1..].contains(&names[i]) {
                return Err(WordError::Alphabet(format!("generator '{}' repeats", names[i])));
            }
        }
        Ok(Alphabet { names })
    }

    /// `a, b, c, ...` for ranks up to 26.
    pub fn standard(rank: usize) -> Self {
        assert!(rank <= 26, "standard alphabet holds at most 26 generators");
        Alphabet {
            names: (0..rank).map(|i| (b'a' + i as u8) as char).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, gen: usize) -> char {
        self.names[gen]
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        let lower = c.to_ascii_lowercase();
        self.names.iter().position(|&n| n == lower)
    }

    /// Parse a word: lowercase letters are generators, uppercase their
    /// inverses, `(...)` groups, and `^k` (k a possibly negative integer)
    /// raises the preceding letter or group to a power. Whitespace is
    /// ignored.
    pub fn parse(&self, s: &str) -> Result<Word, WordError> {
        let chars: Vec<char> = s.chars().collect();
        let mut pos = 0;
        let letters = self.parse_seq(&chars, &mut pos, 0)?;
        if pos != chars.len() {
            return Err(WordError::Syntax {
                pos,
                what: format!("unexpected '{}'", chars[pos]),
            });
        }
        Ok(Word::from_letters(letters))
    }

    fn parse_seq(&self, s: &[char], pos: &mut usize, depth: usize) -> Result<Vec<Letter>, WordError> {
        let mut out = Vec::new();
        loop {
            while *pos < s.len() && s[*pos].is_whitespace() {
                *pos += 1;
            }
            if *pos >= s.len() {
                break;
            }
            let c = s[*pos];
            let atom: Vec<Letter> = if c == '(' {
                *pos += 1;
                let inner = self.parse_seq(s, pos, depth + 1)?;
                if *pos >= s.len() || s[*pos] != ')' {
                    return Err(WordError::Syntax {
                        pos: *pos,
                        what: "expected ')'".into(),
                    });
                }
                *pos += 1;
                inner
            } else if c == ')' {
                if depth == 0 {
                    return Err(WordError::Syntax {
                        pos: *pos,
                        what: "unmatched ')'".into(),
                    });
                }
                break;
            } else if c == '1' {
                // The rendering of the empty word; handy in relator fields.
                *pos += 1;
                Vec::new()
            } else if c.is_ascii_alphabetic() {
                let gen = self
                    .index_of(c)
                    .ok_or(WordError::UnknownGenerator(c.to_ascii_lowercase()))?;
                *pos += 1;
                vec![letter(gen, c.is_ascii_lowercase())]
            } else {
                return Err(WordError::Syntax {
                    pos: *pos,
                    what: format!("unexpected '{c}'"),
                });
            };
            while *pos < s.len() && s[*pos].is_whitespace() {
                *pos += 1;
            }
            let exp = if *pos < s.len() && s[*pos] == '^' {
                *pos += 1;
                self.parse_exponent(s, pos)?
            } else {
                1
            };
            append_power(&mut out, &atom, exp);
        }
        Ok(out)
    }

    fn parse_exponent(&self, s: &[char], pos: &mut usize) -> Result<i32, WordError> {
        while *pos < s.len() && s[*pos].is_whitespace() {
            *pos += 1;
        }
        let start = *pos;
        let neg = if *pos < s.len() && s[*pos] == '-' {
            *pos += 1;
            true
        } else {
            false
        };
        let mut value: i64 = 0;
        let mut digits = 0;
        while *pos < s.len() && s[*pos].is_ascii_digit() {
            value = value * 10 + (s[*pos] as i64 - '0' as i64);
            if value > 10_000 {
                return Err(WordError::Syntax {
                    pos: start,
                    what: "exponent too large".into(),
                });
            }
            digits += 1;
            *pos += 1;
        }
        if digits == 0 {
            return Err(WordError::Syntax {
                pos: *pos,
                what: "expected exponent digits after '^'".into(),
            });
        }
        Ok(if neg { -value as i32 } else { value as i32 })
    }

    /// Render letters with run compression: `aa` becomes `a^2`, `AA` becomes
    /// `a^-2`, a single inverse stays `A`. The empty word renders as `1`.
    pub fn render(&self, letters: &[Letter]) -> String {
        if letters.is_empty() {
            return "1".into();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < letters.len() {
            let l = letters[i];
            let mut j = i;
            while j < letters.len() && letters[j] == l {
                j += 1;
            }
            let run = (j - i) as i64;
            let name = self.names[gen_index(l)];
            if run == 1 {
                if l > 0 {
                    out.push(name);
                } else {
                    out.push(name.to_ascii_uppercase());
                }
            } else {
                let exp = if l > 0 { run } else { -run };
                out.push(name);
                out.push('^');
                out.push_str(&exp.to_string());
            }
            i = j;
        }
        out
    }
}

fn append_letter(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&-l) {
        out.pop();
    } else {
        out.push(l);
    }
}

fn append_power(out: &mut Vec<Letter>, atom: &[Letter], exp: i32) {
    if exp >= 0 {
        for _ in 0..exp {
            for &l in atom {
                append_letter(out, l);
            }
        }
    } else {
        for _ in 0..-exp {
            for &l in atom.iter().rev() {
                append_letter(out, -l);
            }
        }
    }
}

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word{:?}", self.0)
    }
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn single(l: Letter) -> Self {
        debug_assert!(l != 0);
        Word(vec![l])
    }

    /// Builds a word, freely reducing as it goes.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        let mut out = Vec::new();
        for l in iter {
            debug_assert!(l != 0);
            append_letter(&mut out, l);
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            append_letter(&mut out, l);
        }
        Word(out)
    }

    /// `by * self * by^-1`.
    pub fn conjugated_by(&self, by: &Word) -> Word {
        by.concat(self).concat(&by.inverse())
    }

    pub fn pow(&self, n: i32) -> Word {
        let mut out = Vec::new();
        append_power(&mut out, &self.0, n);
        Word(out)
    }

    /// Largest generator index used, if any.
    pub fn max_gen(&self) -> Option<usize> {
        self.0.iter().map(|&l| gen_index(l)).max()
    }

    pub fn abelianize(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for &l in &self.0 {
            v[gen_index(l)] += if l > 0 { 1 } else { -1 };
        }
        v
    }

    /// Occurrences of each generator counting both signs.
    pub fn support_counts(&self, rank: usize) -> Vec<usize> {
        let mut v = vec![0usize; rank];
        for &l in &self.0 {
            v[gen_index(l)] += 1;
        }
        v
    }

    /// Splits into `(cyclic part, conjugator)` with
    /// `self = conjugator * cyclic.to_word() * conjugator^-1` exactly (the
    /// conjugator absorbs the rotation that canonicalizes the cyclic part).
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let mut lo = 0;
        let mut hi = self.0.len();
        while hi - lo >= 2 && self.0[lo] == -self.0[hi - 1] {
            lo += 1;
            hi -= 1;
        }
        let trimmed = self.0[lo..hi].to_vec();
        let cyc = CyclicWord::new(trimmed.clone());
        // v = v[..r] * canon * v[..r]^-1 where r rotates v into canon.
        let n = trimmed.len();
        let mut offset = 0;
        for r in 0..n {
            if (0..n).all(|i| trimmed[(r + i) % n] == cyc.0[i]) {
                offset = r;
                break;
            }
        }
        let conj = Word(self.0[..lo].to_vec()).concat(&Word(trimmed[..offset].to_vec()));
        (cyc, conj)
    }

    /// Replaces generator `i` by `images[i]` (inverse letters by the inverse
    /// image) and reduces.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Vec::new();
        for &l in &self.0 {
            let img = &images[gen_index(l)];
            if l > 0 {
                for &m in &img.0 {
                    append_letter(&mut out, m);
                }
            } else {
                for &m in img.0.iter().rev() {
                    append_letter(&mut out, -m);
                }
            }
        }
        Word(out)
    }

    pub fn render(&self, ab: &Alphabet) -> String {
        ab.render(&self.0)
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word::from_letters(iter)
    }
}

/// A conjugacy class of a cyclically reduced word, stored as the least
/// rotation (letters compared as `i32`s).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Vec<Letter>);

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord{:?}", self.0)
    }
}

impl CyclicWord {
    /// `letters` must already be cyclically reduced; rotates to canonical
    /// form. Panics when handed a non-cyclically-reduced word, as that is
    /// always a caller bug.
    pub fn new(letters: Vec<Letter>) -> Self {
        if !letters.is_empty() {
            assert!(
                letters[0] != -letters[letters.len() - 1] || letters.len() == 1,
                "not cyclically reduced"
            );
            for w in letters.windows(2) {
                assert!(w[0] != -w[1], "not freely reduced");
            }
        }
        CyclicWord(least_rotation(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn rotation(&self, start: usize) -> Vec<Letter> {
        let n = self.0.len();
        (0..n).map(|i| self.0[(start + i) % n]).collect()
    }

    /// As a plain word (the canonical rotation).
    pub fn to_word(&self) -> Word {
        Word(self.0.clone())
    }

    /// The class of the inverse word.
    pub fn inverse_class(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.0.iter().rev().map(|&l| -l).collect();
        CyclicWord(least_rotation(inv))
    }

    /// Smallest `p` with `w = root^d`, `d = len/p` maximal. The empty word
    /// reports degree 0 with an empty root.
    pub fn period_degree(&self) -> (Word, usize) {
        let n = self.0.len();
        if n == 0 {
            return (Word::empty(), 0);
        }
        for p in 1..=n {
            if n % p != 0 {
                continue;
            }
            if (0..n).all(|i| self.0[i] == self.0[(i + p) % n]) {
                return (Word(self.0[..p].to_vec()), n / p);
            }
        }
        unreachable!("p = n always matches");
    }

    pub fn abelianize(&self, rank: usize) -> Vec<i64> {
        Word(self.0.clone()).abelianize(rank)
    }

    pub fn render(&self, ab: &Alphabet) -> String {
        ab.render(&self.0)
    }
}

fn least_rotation(letters: Vec<Letter>) -> Vec<Letter> {
    let n = letters.len();
    if n <= 1 {
        return letters;
    }
    let mut best = 0;
    for start in 1..n {
        for i in 0..n {
            let a = letters[(start + i) % n];
            let b = letters[(best + i) % n];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    best = start;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    (0..n).map(|i| letters[(best + i) % n]).collect()
}

/// gcd of a slice, ignoring signs; 0 for an all-zero (or empty) slice.
pub fn gcd_all(values: &[i64]) -> i64 {
    values.iter().fold(0i64, |g, &v| gcd(g, v.abs()))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab2() -> Alphabet {
        Alphabet::standard(2)
    }

    #[test]
    fn parse_and_render_round_trip() {
        let ab = ab2();
        for s in ["abAB", "a^3B", "b^-2a", "1"] {
            let w = if s == "1" { Word::empty() } else { ab.parse(s).unwrap() };
            assert_eq!(ab.parse(&w.render(&ab)).unwrap(), w, "round trip for {s}");
        }
    }

    #[test]
    fn parse_powers_and_groups() {
        let ab = ab2();
        assert_eq!(ab.parse("(ab)^2").unwrap(), ab.parse("abab").unwrap());
        assert_eq!(ab.parse("(ab)^-1").unwrap(), ab.parse("BA").unwrap());
        assert_eq!(ab.parse("a^-2").unwrap(), ab.parse("AA").unwrap());
        assert_eq!(ab.parse("a^0 b").unwrap(), ab.parse("b").unwrap());
        assert_eq!(ab.parse(" a \tb ").unwrap(), ab.parse("ab").unwrap());
    }

    #[test]
    fn parse_rejects_garbage() {
        let ab = ab2();
        assert!(ab.parse("ax").is_err());
        assert!(ab.parse("(ab").is_err());
        assert!(ab.parse("a^").is_err());
        assert!(ab.parse("a)").is_err());
        assert!(ab.parse("a*b").is_err());
    }

    #[test]
    fn free_reduction_is_a_homomorphism() {
        let ab = ab2();
        let u = ab.parse("abA").unwrap();
        let v = ab.parse("aB").unwrap();
        assert_eq!(u.concat(&v), ab.parse("a").unwrap());
        assert_eq!(u.concat(&u.inverse()), Word::empty());
        assert_eq!(u.inverse().inverse(), u);
    }

    #[test]
    fn cyclic_reduce_recovers_the_conjugator() {
        let ab = ab2();
        for s in ["abaBA", "ababA", "aa", "baB", "abAB", "a"] {
            let w = ab.parse(s).unwrap();
            let (cyc, conj) = w.cyclic_reduce();
            assert_eq!(cyc.to_word().conjugated_by(&conj), w, "identity for {s}");
            assert!(
                cyc.is_empty()
                    || cyc.letters()[0] != -cyc.letters()[cyc.len() - 1]
                    || cyc.len() == 1
            );
        }
        assert_eq!(ab.parse("abaBA").unwrap().cyclic_reduce().0.len(), 1);
        assert_eq!(ab.parse("ababA").unwrap().cyclic_reduce().0.len(), 3);
    }

    #[test]
    fn cyclic_words_are_rotation_invariant() {
        let ab = ab2();
        let u = ab.parse("aab").unwrap().cyclic_reduce().0;
        let v = ab.parse("aba").unwrap().cyclic_reduce().0;
        let w = ab.parse("baa").unwrap().cyclic_reduce().0;
        assert_eq!(u, v);
        assert_eq!(v, w);
    }

    #[test]
    fn period_degree_detects_proper_powers() {
        let ab = ab2();
        let w = ab.parse("abab").unwrap().cyclic_reduce().0;
        let (root, d) = w.period_degree();
        assert_eq!(d, 2);
        assert_eq!(root, ab.parse("ab").unwrap());
        let w = ab.parse("aabab").unwrap().cyclic_reduce().0;
        assert_eq!(w.period_degree().1, 1);
        let w = ab.parse("a^6").unwrap().cyclic_reduce().0;
        assert_eq!(w.period_degree().1, 6);
    }

    #[test]
    fn period_degree_multiplies_under_powers() {
        let ab = ab2();
        let base = ab.parse("aab").unwrap();
        for k in 1..5 {
            let w = base.pow(k).cyclic_reduce().0;
            assert_eq!(w.period_degree().1, k as usize);
        }
    }

    #[test]
    fn abelianize_counts_signed_occurrences() {
        let ab = ab2();
        assert_eq!(ab.parse("aabAB").unwrap().abelianize(2), vec![1, 0]);
        assert_eq!(ab.parse("abAB").unwrap().abelianize(2), vec![0, 0]);
    }

    #[test]
    fn substitute_is_functorial() {
        let ab = ab2();
        let w = ab.parse("abA").unwrap();
        let images = vec![ab.parse("ab").unwrap(), ab.parse("B").unwrap()];
        let got = w.substitute(&images);
        assert_eq!(got, ab.parse("abBBA").unwrap());
    }

    #[test]
    fn gcd_helpers() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd_all(&[0, 0]), 0);
        assert_eq!(gcd_all(&[4, -6]), 2);
    }
}
