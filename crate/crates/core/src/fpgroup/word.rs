use alloc::vec::Vec;
use core::fmt;

/// One of the four letters `γ0, γ1, γ0⁻¹, γ1⁻¹`.
///
/// The discriminants fix the global scan order used by standard numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Letter {
    G0 = 0,
    G1 = 1,
    G0Inv = 2,
    G1Inv = 3,
}

impl Letter {
    /// Letters in scan order.
    pub const ALL: [Letter; 4] = [Letter::G0, Letter::G1, Letter::G0Inv, Letter::G1Inv];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Letter {
        Self::ALL[i]
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Self::from_index(self.index() ^ 2)
    }
}

/// A word over two generators, stored as runs `(letter, length)`.
///
/// Runs are kept merged (no two adjacent runs share a letter) but inverse
/// pairs are only cancelled by [`Word::reduce`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Word {
    runs: Vec<(Letter, u32)>,
}

impl Word {
    pub fn empty() -> Self {
        Word { runs: Vec::new() }
    }

    pub fn letter(l: Letter) -> Self {
        Word::power(l, 1)
    }

    pub fn power(l: Letter, k: u32) -> Self {
        let mut w = Word::empty();
        w.push_run(l, k);
        w
    }

    /// `γ0` and `γ1`.
    pub fn generators() -> [Word; 2] {
        [Word::letter(Letter::G0), Word::letter(Letter::G1)]
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Word::empty();
        for l in letters {
            w.push_run(l, 1);
        }
        w
    }

    /// Signed exponent form: `(0, 3)` is `γ0³`, `(1, -2)` is `γ1⁻²`.
    pub fn from_syllables(syllables: &[(u8, i64)]) -> Self {
        let mut w = Word::empty();
        for &(g, e) in syllables {
            let l = match (g, e < 0) {
                (0, false) => Letter::G0,
                (0, true) => Letter::G0Inv,
                (_, false) => Letter::G1,
                (_, true) => Letter::G1Inv,
            };
            w.push_run(l, e.unsigned_abs() as u32);
        }
        w.reduce()
    }

    pub fn push_run(&mut self, l: Letter, k: u32) {
        if k == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some((last, n)) if *last == l => *n += k,
            _ => self.runs.push((l, k)),
        }
    }

    pub fn runs(&self) -> &[(Letter, u32)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.runs.iter().map(|&(_, k)| k as usize).sum()
    }

    /// Letters one at a time, expanding runs lazily.
    pub fn letters(&self) -> impl DoubleEndedIterator<Item = Letter> + '_ {
        self.runs.iter().flat_map(|&(l, k)| core::iter::repeat_n(l, k as usize))
    }

    pub fn to_letter_vec(&self) -> Vec<Letter> {
        self.letters().collect()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &(l, k) in &other.runs {
            w.push_run(l, k);
        }
        w
    }

    pub fn pow(&self, k: u32) -> Word {
        let mut w = Word::empty();
        for _ in 0..k {
            for &(l, n) in &self.runs {
                w.push_run(l, n);
            }
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word { runs: self.runs.iter().rev().map(|&(l, k)| (l.inverse(), k)).collect() }
    }

    /// `u · self · u⁻¹`, reduced.
    pub fn conjugate_by(&self, u: &Word) -> Word {
        u.concat(self).concat(&u.inverse()).reduce()
    }

    /// Free reduction.
    pub fn reduce(&self) -> Word {
        let mut out: Vec<(Letter, u32)> = Vec::with_capacity(self.runs.len());
        for &(l, mut k) in &self.runs {
            while k > 0 {
                match out.last_mut() {
                    Some((last, n)) if *last == l => {
                        *n += k;
                        k = 0;
                    }
                    Some((last, n)) if *last == l.inverse() => {
                        let c = (*n).min(k);
                        *n -= c;
                        k -= c;
                        if *n == 0 {
                            out.pop();
                        }
                    }
                    _ => {
                        out.push((l, k));
                        k = 0;
                    }
                }
            }
        }
        Word { runs: out }
    }

    /// Free and cyclic reduction.
    pub fn cyclic_reduce(&self) -> Word {
        let mut w = self.reduce();
        loop {
            let (Some(&(first, a)), Some(&(last, b))) = (w.runs.first(), w.runs.last()) else {
                return w;
            };
            if w.runs.len() == 1 {
                return w;
            }
            if first == last {
                // merge the wrap-around runs into the front
                w.runs.pop();
                w.runs[0].1 = a + b;
                return w;
            }
            if first != last.inverse() {
                return w;
            }
            let c = a.min(b);
            w.runs[0].1 -= c;
            let l = w.runs.len() - 1;
            w.runs[l].1 -= c;
            w.runs.retain(|&(_, k)| k > 0);
            w = w.reduce();
        }
    }

    /// Homomorphic image under `γ0 ↦ images[0]`, `γ1 ↦ images[1]`, reduced.
    pub fn substitute(&self, images: &[Word; 2]) -> Word {
        let inverses = [images[0].inverse(), images[1].inverse()];
        let mut w = Word::empty();
        for &(l, k) in &self.runs {
            let img = match l {
                Letter::G0 => &images[0],
                Letter::G1 => &images[1],
                Letter::G0Inv => &inverses[0],
                Letter::G1Inv => &inverses[1],
            };
            for _ in 0..k {
                for &(m, n) in img.runs() {
                    w.push_run(m, n);
                }
            }
        }
        w.reduce()
    }

    /// Parses words like `a b^-1 (a b)^3 a^2`, where `a = γ0` and `b = γ1`.
    /// `1` or an empty string is the identity.
    pub fn parse(s: &str) -> Result<Word, WordParseError> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let w = parse_product(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(WordParseError(pos));
        }
        Ok(w.reduce())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse word at byte {0}")]
pub struct WordParseError(pub usize);

fn skip_ws(b: &[u8], pos: &mut usize) {
    while *pos < b.len() && (b[*pos] == b' ' || b[*pos] == b'*' || b[*pos] == b'.') {
        *pos += 1;
    }
}

fn parse_product(b: &[u8], pos: &mut usize) -> Result<Word, WordParseError> {
    let mut w = Word::empty();
    loop {
        skip_ws(b, pos);
        if *pos >= b.len() || b[*pos] == b')' {
            return Ok(w);
        }
        let atom = match b[*pos] {
            b'a' => {
                *pos += 1;
                Word::letter(Letter::G0)
            }
            b'b' => {
                *pos += 1;
                Word::letter(Letter::G1)
            }
            b'1' => {
                *pos += 1;
                Word::empty()
            }
            b'(' => {
                *pos += 1;
                let inner = parse_product(b, pos)?;
                if *pos >= b.len() || b[*pos] != b')' {
                    return Err(WordParseError(*pos));
                }
                *pos += 1;
                inner
            }
            _ => return Err(WordParseError(*pos)),
        };
        let atom = if *pos < b.len() && b[*pos] == b'^' {
            *pos += 1;
            let neg = *pos < b.len() && b[*pos] == b'-';
            if neg {
                *pos += 1;
            }
            let start = *pos;
            while *pos < b.len() && b[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let k: u32 =
                core::str::from_utf8(&b[start..*pos]).ok().and_then(|t| t.parse().ok()).ok_or(WordParseError(start))?;
            let base = if neg { atom.inverse() } else { atom };
            base.pow(k)
        } else {
            atom
        };
        w = w.concat(&atom);
    }
}

impl fmt::Display for Word {
    /// Renders with `a = γ0`, `b = γ1`; parses back with [`Word::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return f.write_str("1");
        }
        for (i, &(l, k)) in self.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let (name, neg) = match l {
                Letter::G0 => ("a", false),
                Letter::G1 => ("b", false),
                Letter::G0Inv => ("a", true),
                Letter::G1Inv => ("b", true),
            };
            match (neg, k) {
                (false, 1) => write!(f, "{name}")?,
                (false, k) => write!(f, "{name}^{k}")?,
                (true, k) => write!(f, "{name}^-{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use Letter::*;

    #[test]
    fn letter_inverse() {
        for l in Letter::ALL {
            assert_eq!(l.inverse().inverse(), l);
            assert_ne!(l.inverse(), l);
        }
        assert_eq!(G0.inverse(), G0Inv);
        assert_eq!(G1Inv.inverse(), G1);
    }

    #[test]
    fn reduce_cancels() {
        let w = Word::from_letters([G0, G0Inv]);
        assert!(w.reduce().is_empty());
        let w = Word::from_letters([G0, G1, G1Inv, G1, G0Inv, G0, G0]);
        assert_eq!(w.reduce(), Word::from_letters([G0, G1, G0]));
        let w = Word::power(G0, 3).concat(&Word::power(G0Inv, 5));
        assert_eq!(w.reduce(), Word::power(G0Inv, 2));
    }

    #[test]
    fn cyclic_reduction() {
        let w = Word::from_letters([G1, G0, G0, G1Inv]);
        assert_eq!(w.cyclic_reduce(), Word::power(G0, 2));
        let w = Word::from_letters([G0, G1, G0]);
        assert_eq!(w.cyclic_reduce(), Word::from_letters([G0, G0, G1]));
    }

    #[test]
    fn run_length_storage() {
        let w = Word::power(G0, 400);
        assert_eq!(w.runs().len(), 1);
        assert_eq!(w.len(), 400);
        assert_eq!(w.letters().count(), 400);
    }

    #[test]
    fn parse_and_display() {
        let w = Word::parse("a b^-1 (a b)^2 a^3").unwrap();
        assert_eq!(w.to_string(), "a b^-1 a b a b a^3");
        assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
        assert_eq!(Word::parse("1").unwrap(), Word::empty());
        assert_eq!(Word::parse("(a b)^-1").unwrap(), Word::from_letters([G1Inv, G0Inv]));
        assert!(Word::parse("a c").is_err());
        assert!(Word::parse("(a b").is_err());
    }

    #[test]
    fn substitution() {
        let images = [Word::parse("b").unwrap(), Word::parse("a b a").unwrap()];
        assert_eq!(Word::letter(G0).substitute(&images), images[0]);
        assert!(Word::from_letters([G0, G0Inv]).substitute(&images).is_empty());
        assert_eq!(Word::letter(G1Inv).substitute(&images), Word::parse("a^-1 b^-1 a^-1").unwrap());
    }
}
