//! Free-group combinatorics: reduced words, length-lex enumeration, cyclic
//! reduction and conjugacy classes.
//!
//! Letters are signed generator indices `±1..=±k`. Internally a letter is
//! also given a *rank* `2(|l| - 1) + [l < 0]`, so the alphabet is ordered
//! `a < A < b < B < ...` (capitals are inverses) and the inverse of rank `r`
//! is `r ^ 1`. All orders below are with respect to ranks.
//!
//! Conjugacy classes are produced as necklaces (least rotations) by a
//! Fredricksen-Kessler-Maiorana walk restricted to freely reduced words.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Default cap on the number of words any enumeration may produce.
pub const DEFAULT_BUDGET: u128 = 1 << 34;

pub type Letter = i8;

#[inline]
pub fn letter_rank(l: Letter) -> u8 {
    (2 * (l.unsigned_abs() - 1) + u8::from(l < 0)) as u8
}

#[inline]
pub fn rank_letter(r: u8) -> Letter {
    let g = (r / 2 + 1) as i8;
    if r & 1 == 1 {
        -g
    } else {
        g
    }
}

#[inline]
pub fn inverse_rank(r: u8) -> u8 {
    r ^ 1
}

/// Freely reduced word in the free group of rank `k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

impl Word {
    /// Builds a word, freely reducing the input.
    pub fn new(rank: usize, letters: &[Letter]) -> Result<Self> {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l.unsigned_abs() as usize > rank {
                return Err(Error::OutOfRange(format!("letter {l} for rank {rank}")));
            }
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word { rank, letters: out })
    }

    pub fn empty(rank: usize) -> Self {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn from_ranks(rank: usize, ranks: &[u8]) -> Self {
        Word {
            rank,
            letters: ranks.iter().map(|&r| rank_letter(r)).collect(),
        }
    }

    /// Parses `a`..`z` as generators and `A`..`Z` as their inverses.
    pub fn parse(rank: usize, s: &str) -> Result<Self> {
        let mut v = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let l = match ch {
                'a'..='z' => (ch as u8 - b'a' + 1) as i8,
                'A'..='Z' => -((ch as u8 - b'A' + 1) as i8),
                _ => return Err(Error::Parse(format!("bad letter {ch:?} in word {s:?}"))),
            };
            v.push(l);
        }
        Word::new(rank, &v)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn ranks(&self) -> Vec<u8> {
        self.letters.iter().map(|&l| letter_rank(l)).collect()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
        }
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word {
            rank: self.rank.max(other.rank),
            letters: out,
        }
    }

    pub fn pow(&self, n: usize) -> Word {
        let mut w = Word::empty(self.rank);
        for _ in 0..n {
            w = w.concat(self);
        }
        w
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != -l,
            _ => true,
        }
    }

    /// Cyclic rotation moving the first `r` letters to the end.
    pub fn rotate(&self, r: usize) -> Word {
        let mut v = self.letters.clone();
        if !v.is_empty() {
            let r = r % v.len();
            v.rotate_left(r);
        }
        Word {
            rank: self.rank,
            letters: v,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.letters {
            let c = if l > 0 {
                (b'a' + (l - 1) as u8) as char
            } else {
                (b'A' + (-l - 1) as u8) as char
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Rank is inferred from the largest generator used.
    fn from_str(s: &str) -> Result<Self> {
        let k = s
            .chars()
            .map(|c| c.to_ascii_lowercase())
            .filter(|c| c.is_ascii_lowercase())
            .map(|c| (c as u8 - b'a' + 1) as usize)
            .max()
            .unwrap_or(1);
        Word::parse(k, s)
    }
}

/// Returns `(core, conjugator)` with `w = conjugator * core * conjugator^-1`.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let l = &w.letters;
    let mut i = 0;
    let mut j = l.len();
    while j - i >= 2 && l[i] == -l[j - 1] {
        i += 1;
        j -= 1;
    }
    (
        Word {
            rank: w.rank,
            letters: l[i..j].to_vec(),
        },
        Word {
            rank: w.rank,
            letters: l[..i].to_vec(),
        },
    )
}

/// Conjugacy class of a free-group element, stored by its canonical core.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ConjClass {
    core: Word,
    primitive: bool,
}

impl ConjClass {
    /// Canonical class of an arbitrary reduced word.
    pub fn of(w: &Word) -> ConjClass {
        let (core, _) = cyclic_reduce(w);
        let ranks = core.ranks();
        let r = least_rotation(&ranks);
        let mut canon = ranks.clone();
        canon.rotate_left(r);
        let primitive = is_primitive_ranks(&canon);
        ConjClass {
            core: Word::from_ranks(w.rank, &canon),
            primitive,
        }
    }

    pub(crate) fn from_canonical(rank: usize, ranks: &[u8], primitive: bool) -> ConjClass {
        ConjClass {
            core: Word::from_ranks(rank, ranks),
            primitive,
        }
    }

    pub fn core(&self) -> &Word {
        &self.core
    }

    /// Cyclically reduced length.
    pub fn len(&self) -> usize {
        self.core.len()
    }

    pub fn is_empty(&self) -> bool {
        self.core.is_empty()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn inverse(&self) -> ConjClass {
        ConjClass::of(&self.core.inverse())
    }

    /// Key for the canonical order: length, then rank-lexicographic.
    pub fn order_key(&self) -> (usize, Vec<u8>) {
        (self.core.len(), self.core.ranks())
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.core)
    }
}

/// Index of the lexicographically least rotation (first one on ties).
pub fn least_rotation(s: &[u8]) -> usize {
    let n = s.len();
    let mut best = 0;
    for r in 1..n {
        for i in 0..n {
            let a = s[(r + i) % n];
            let b = s[(best + i) % n];
            if a != b {
                if a < b {
                    best = r;
                }
                break;
            }
        }
    }
    best
}

/// A non-empty word is primitive iff its least period (from the failure
/// function) does not divide its length properly.
pub fn is_primitive_ranks(s: &[u8]) -> bool {
    let n = s.len();
    if n <= 1 {
        return n == 1;
    }
    let mut fail = vec![0usize; n + 1];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && s[i] != s[k] {
            k = fail[k];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i + 1] = k;
    }
    let p = n - fail[n];
    p == n || n % p != 0
}

/// Number of reduced words of length exactly `n` in rank `k`.
pub fn element_count(k: usize, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    let k = k as u128;
    2 * k * (2 * k - 1).pow(n as u32 - 1)
}

/// Number of cyclically reduced words of length exactly `n >= 1`.
pub fn cyclic_word_count(k: usize, n: usize) -> u128 {
    let k = k as u128;
    let even = if n % 2 == 0 { 2 } else { 0 };
    (2 * k - 1).pow(n as u32) + 1 + (k - 1) * even
}

fn check_args(k: usize, max_len: usize) -> Result<()> {
    if k < 1 || k > 26 {
        return Err(Error::OutOfRange(format!("rank {k} (supported 1..=26)")));
    }
    if max_len < 1 {
        return Err(Error::OutOfRange("maximal length must be at least 1".into()));
    }
    Ok(())
}

fn check_budget(requested: u128, budget: u128) -> Result<()> {
    if requested > budget {
        Err(Error::BudgetExceeded { requested, budget })
    } else {
        Ok(())
    }
}

/// Length-lex iterator over all non-trivial reduced words of length `<= L`.
pub struct ElementIter {
    k: usize,
    max_len: usize,
    cur: Vec<u8>,
}

impl Iterator for ElementIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let alpha = (2 * self.k) as u8;
        if self.cur.is_empty() {
            self.cur.push(0);
        } else if !advance_reduced(&mut self.cur, alpha) {
            let n = self.cur.len() + 1;
            if n > self.max_len {
                return None;
            }
            self.cur.clear();
            for _ in 0..n {
                let prev = self.cur.last().copied();
                self.cur.push(smallest_after(prev));
            }
        }
        Some(Word::from_ranks(self.k, &self.cur))
    }
}

fn smallest_after(prev: Option<u8>) -> u8 {
    match prev {
        Some(1) => 1,
        _ => 0,
    }
}

/// Next reduced word of the same length in lex order; false when exhausted.
fn advance_reduced(w: &mut [u8], alpha: u8) -> bool {
    let n = w.len();
    let mut i = n;
    while i > 0 {
        i -= 1;
        let prev = if i == 0 { None } else { Some(w[i - 1]) };
        let mut c = w[i] + 1;
        if prev.map(inverse_rank) == Some(c) {
            c += 1;
        }
        if c < alpha {
            w[i] = c;
            for j in i + 1..n {
                w[j] = smallest_after(Some(w[j - 1]));
            }
            return true;
        }
    }
    false
}

/// Every reduced word of length `1..=max_len` exactly once, in length-lex
/// order.
pub fn enumerate_elements(k: usize, max_len: usize, budget: u128) -> Result<ElementIter> {
    check_args(k, max_len)?;
    let total: u128 = (1..=max_len).map(|n| element_count(k, n)).sum();
    check_budget(total, budget)?;
    Ok(ElementIter {
        k,
        max_len,
        cur: Vec::new(),
    })
}

/// Callbacks for depth-first walks that share prefix work.
pub trait WordVisitor {
    /// The prefix is extended by `rank`.
    fn push(&mut self, rank: u8);
    /// The last letter is removed.
    fn pop(&mut self);
    /// The current prefix is a word to report. For class walks `primitive`
    /// tells whether the necklace is aperiodic.
    fn emit(&mut self, word: &[u8], primitive: bool);
}

/// Depth-first walk over all reduced words of length `1..=max_len` whose
/// first letter has rank `first`. Each word is emitted once, in prefix
/// order (`w` before its extensions).
pub fn walk_elements<V: WordVisitor>(k: usize, max_len: usize, first: u8, v: &mut V) {
    let alpha = (2 * k) as u8;
    let mut buf = Vec::with_capacity(max_len);
    fn rec<V: WordVisitor>(buf: &mut Vec<u8>, alpha: u8, max_len: usize, v: &mut V) {
        v.emit(buf, true);
        if buf.len() == max_len {
            return;
        }
        let forbidden = inverse_rank(*buf.last().unwrap());
        for c in 0..alpha {
            if c == forbidden {
                continue;
            }
            buf.push(c);
            v.push(c);
            rec(buf, alpha, max_len, v);
            v.pop();
            buf.pop();
        }
    }
    buf.push(first);
    v.push(first);
    rec(&mut buf, alpha, max_len, v);
    v.pop();
}

/// Depth-first walk emitting the canonical core of every conjugacy class
/// with cyclically reduced length `1..=max_len` whose canonical form starts
/// with `first`. With `primitive_only`, proper powers are skipped.
pub fn walk_classes<V: WordVisitor>(
    k: usize,
    max_len: usize,
    first: u8,
    primitive_only: bool,
    v: &mut V,
) {
    let alpha = (2 * k) as u8;
    struct Ctx<'a, V> {
        alpha: u8,
        max_len: usize,
        primitive_only: bool,
        v: &'a mut V,
        a: Vec<u8>,
    }
    // a is 0-based here; p is the length of the longest Lyndon prefix
    fn rec<V: WordVisitor>(cx: &mut Ctx<'_, V>, p: usize) {
        let t = cx.a.len();
        let cyc_ok = t == 1 || cx.a[t - 1] != inverse_rank(cx.a[0]);
        if cyc_ok && t % p == 0 {
            let primitive = p == t;
            if primitive || !cx.primitive_only {
                cx.v.emit(&cx.a, primitive);
            }
        }
        if t == cx.max_len {
            return;
        }
        let forbidden = inverse_rank(cx.a[t - 1]);
        let lo = cx.a[t - p];
        for c in lo..cx.alpha {
            if c == forbidden {
                continue;
            }
            let np = if c == lo { p } else { t + 1 };
            cx.a.push(c);
            cx.v.push(c);
            rec(cx, np);
            cx.v.pop();
            cx.a.pop();
        }
    }
    let mut cx = Ctx {
        alpha,
        max_len,
        primitive_only,
        v,
        a: Vec::with_capacity(max_len),
    };
    cx.a.push(first);
    cx.v.push(first);
    rec(&mut cx, 1);
    cx.v.pop();
}

struct Collect {
    k: usize,
    out: Vec<ConjClass>,
}

impl WordVisitor for Collect {
    fn push(&mut self, _: u8) {}
    fn pop(&mut self) {}
    fn emit(&mut self, w: &[u8], primitive: bool) {
        self.out.push(ConjClass::from_canonical(self.k, w, primitive));
    }
}

/// Requested size of a class enumeration, for budget checks.
pub fn class_budget_estimate(k: usize, max_len: usize) -> u128 {
    (1..=max_len).map(|n| cyclic_word_count(k, n)).sum()
}

/// Every conjugacy class of cyclically reduced length `<= max_len` exactly
/// once, by canonical representative, in canonical (length, lex) order.
/// The class of `g` and of `g^-1` are distinct unless they coincide.
pub fn conjugacy_classes(
    k: usize,
    max_len: usize,
    primitive_only: bool,
    budget: u128,
) -> Result<Vec<ConjClass>> {
    check_args(k, max_len)?;
    check_budget(class_budget_estimate(k, max_len), budget)?;
    let mut all = Vec::new();
    for first in 0..(2 * k) as u8 {
        let mut c = Collect { k, out: Vec::new() };
        walk_classes(k, max_len, first, primitive_only, &mut c);
        all.extend(c.out);
    }
    all.sort_by_cached_key(|c| c.order_key());
    Ok(all)
}
