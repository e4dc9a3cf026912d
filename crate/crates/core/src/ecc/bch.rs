use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::gf::GaloisField;
use crate::{Bits, Error, Result};

/// Named code configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EccName {
    #[serde(rename = "bch127")]
    Bch127,
    #[serde(rename = "bch255")]
    Bch255,
    #[serde(rename = "bch511")]
    Bch511,
}

impl EccName {
    pub const ALL: [EccName; 3] = [EccName::Bch127, EccName::Bch255, EccName::Bch511];

    pub fn as_str(self) -> &'static str {
        match self {
            EccName::Bch127 => "bch127",
            EccName::Bch255 => "bch255",
            EccName::Bch511 => "bch511",
        }
    }

    pub fn code(self) -> &'static BchCode {
        static CODES: [OnceLock<BchCode>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let (slot, m, poly, k, t) = match self {
            EccName::Bch127 => (0, 7, 0x89, 64, 10),
            EccName::Bch255 => (1, 8, 0x11d, 123, 19),
            EccName::Bch511 => (2, 9, 0x211, 241, 30),
        };
        CODES[slot].get_or_init(|| BchCode::new(self, m, poly, k, t))
    }
}

impl fmt::Display for EccName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EccName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bch127" => Ok(EccName::Bch127),
            "bch255" => Ok(EccName::Bch255),
            "bch511" => Ok(EccName::Bch511),
            other => Err(Error::UnknownCode(other.to_string())),
        }
    }
}

/// An n-bit codeword. Bit `i` is the coefficient of `x^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword(Bits);

impl Codeword {
    pub fn bits(&self) -> &Bits {
        &self.0
    }

    pub fn into_bits(self) -> Bits {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeFailure {
    WrongLength,
    /// The error locator has more roots than the decoder accepts.
    TooManyErrors,
    /// Chien search found fewer roots than the locator degree.
    LocatorMismatch,
}

impl fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeFailure::WrongLength => f.write_str("received word has wrong length"),
            DecodeFailure::TooManyErrors => f.write_str("more errors than the code corrects"),
            DecodeFailure::LocatorMismatch => f.write_str("error locator has no consistent roots"),
        }
    }
}

impl std::error::Error for DecodeFailure {}

/// Narrow-sense primitive binary BCH code with systematic encoding.
///
/// Codeword layout: parity in bits `0..n-k`, message in bits `n-k..n`.
#[derive(Debug, Clone)]
pub struct BchCode {
    name: EccName,
    field: GaloisField,
    n: usize,
    k: usize,
    /// Maximum error weight the decoder accepts.
    t: usize,
    /// Error weight guaranteed by the designed distance.
    designed_t: usize,
    /// Generator coefficients, lowest degree first, length n - k + 1.
    generator: Vec<bool>,
    /// Generator without its leading term, packed into words for encoding.
    feedback: Vec<u64>,
}

impl BchCode {
    fn new(name: EccName, m: u32, primitive_poly: u32, k: usize, t: usize) -> Self {
        let field = GaloisField::new(m, primitive_poly);
        let n = field.order();
        let parity = n - k;

        // Accumulate cyclotomic cosets of alpha^1, alpha^3, ... until the
        // generator reaches degree n - k.
        let mut in_generator = vec![false; n];
        let mut roots: Vec<usize> = Vec::new();
        let mut odd = 1;
        while roots.len() < parity {
            if !in_generator[odd] {
                let mut e = odd;
                loop {
                    in_generator[e] = true;
                    roots.push(e);
                    e = (2 * e) % n;
                    if e == odd {
                        break;
                    }
                }
            }
            odd += 2;
        }
        assert_eq!(roots.len(), parity, "BCH({n},{k}) is not a narrow-sense code");
        let designed_t = (1..n).take_while(|&i| in_generator[i]).count() / 2;
        assert!(designed_t >= t, "BCH({n},{k}) cannot correct {t} errors");

        // g(x) = prod (x - alpha^e); coefficients land in GF(2).
        let mut g: Vec<u16> = vec![1];
        for &e in &roots {
            let a = field.alpha_pow(e);
            let mut next = vec![0u16; g.len() + 1];
            for (i, &c) in g.iter().enumerate() {
                next[i + 1] ^= c;
                next[i] ^= field.mul(c, a);
            }
            g = next;
        }
        let generator: Vec<bool> = g
            .iter()
            .map(|&c| {
                assert!(c <= 1, "generator coefficient outside GF(2)");
                c == 1
            })
            .collect();

        let mut feedback = vec![0u64; parity.div_ceil(64)];
        for (i, &c) in generator[..parity].iter().enumerate() {
            if c {
                feedback[i / 64] |= 1 << (i % 64);
            }
        }

        BchCode {
            name,
            field,
            n,
            k,
            t,
            designed_t,
            generator,
            feedback,
        }
    }

    pub fn name(&self) -> EccName {
        self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn designed_t(&self) -> usize {
        self.designed_t
    }

    pub fn m(&self) -> u32 {
        self.field.degree()
    }

    pub fn generator(&self) -> &[bool] {
        &self.generator
    }

    pub fn encode(&self, message: &Bits) -> Result<Codeword> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                actual: message.len(),
            });
        }
        let parity = self.n - self.k;
        let words = self.feedback.len();
        let top_word = (parity - 1) / 64;
        let top_bit = (parity - 1) % 64;
        let top_mask = if parity.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (parity % 64)) - 1
        };

        // LFSR division of m(x) * x^(n-k) by g(x), highest degree first.
        let mut reg = vec![0u64; words];
        for i in (0..self.k).rev() {
            let fb = message[i] ^ (reg[top_word] >> top_bit & 1 == 1);
            for w in (1..words).rev() {
                reg[w] = reg[w] << 1 | reg[w - 1] >> 63;
            }
            reg[0] <<= 1;
            reg[top_word] &= top_mask;
            if fb {
                for (r, f) in reg.iter_mut().zip(&self.feedback) {
                    *r ^= f;
                }
            }
        }

        let bits = (0..parity)
            .map(|j| reg[j / 64] >> (j % 64) & 1 == 1)
            .chain(message.iter())
            .collect();
        Ok(Codeword(bits))
    }

    /// Message bits of a codeword (or any n-bit word), by position.
    pub fn message_of(&self, word: &Bits) -> Bits {
        word.as_slice()[self.n - self.k..].iter().copied().collect()
    }

    /// Syndromes S_1..S_{2 * designed_t} of a received word.
    pub fn syndromes(&self, received: &Bits) -> Vec<u16> {
        let count = 2 * self.designed_t;
        let mut s = vec![0u16; count];
        for i in (0..self.n).filter(|&i| received[i]) {
            for (j, sj) in s.iter_mut().enumerate() {
                *sj ^= self.field.alpha_pow(i * (j + 1));
            }
        }
        s
    }

    pub fn is_codeword(&self, word: &Bits) -> bool {
        word.len() == self.n && self.syndromes(word).iter().all(|&s| s == 0)
    }

    /// Bounded-distance decoding. Returns the message of the unique codeword
    /// within distance `t`, or a failure. Words farther than `t` from every
    /// codeword either fail or (rarely) decode to some other codeword's
    /// message.
    pub fn decode(&self, received: &Bits) -> Result<Bits, DecodeFailure> {
        if received.len() != self.n {
            return Err(DecodeFailure::WrongLength);
        }
        let syndromes = self.syndromes(received);
        if syndromes.iter().all(|&s| s == 0) {
            return Ok(self.message_of(received));
        }

        let locator = self.berlekamp_massey(&syndromes);
        let degree = locator.len() - 1;
        if degree > self.t {
            return Err(DecodeFailure::TooManyErrors);
        }

        // Chien search: position i is in error iff Lambda(alpha^-i) == 0.
        let mut corrected = received.clone();
        let mut found = 0;
        for i in 0..self.n {
            let x = self.field.alpha_pow(self.n - i);
            let mut acc = 0u16;
            let mut xp = 1u16;
            for &c in &locator {
                acc ^= self.field.mul(c, xp);
                xp = self.field.mul(xp, x);
            }
            if acc == 0 {
                corrected.flip(i);
                found += 1;
            }
        }
        if found != degree {
            return Err(DecodeFailure::LocatorMismatch);
        }
        Ok(self.message_of(&corrected))
    }

    /// Error locator polynomial, lowest degree first, trimmed so the last
    /// coefficient is nonzero.
    fn berlekamp_massey(&self, syndromes: &[u16]) -> Vec<u16> {
        let f = &self.field;
        let mut lambda = vec![1u16];
        let mut prev = vec![1u16];
        let mut l = 0usize;
        let mut shift = 1usize;
        let mut prev_discrepancy = 1u16;

        for r in 0..syndromes.len() {
            let mut d = syndromes[r];
            for i in 1..=l.min(lambda.len() - 1) {
                d ^= f.mul(lambda[i], syndromes[r - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let scale = f.div(d, prev_discrepancy);
            let mut next = lambda.clone();
            if next.len() < prev.len() + shift {
                next.resize(prev.len() + shift, 0);
            }
            for (i, &p) in prev.iter().enumerate() {
                next[i + shift] ^= f.mul(scale, p);
            }
            if 2 * l <= r {
                l = r + 1 - l;
                prev = lambda;
                prev_discrepancy = d;
                shift = 1;
            } else {
                shift += 1;
            }
            lambda = next;
        }
        while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
            lambda.pop();
        }
        lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, len: usize) -> Bits {
        (0..len).map(|_| rng.random()).collect()
    }

    #[test]
    fn parameters_match_named_configs() {
        let expect = [(127, 64, 10, 10), (255, 123, 19, 19), (511, 241, 30, 36)];
        for (name, (n, k, t, designed)) in EccName::ALL.into_iter().zip(expect) {
            let c = name.code();
            assert_eq!((c.n(), c.k(), c.t(), c.designed_t()), (n, k, t, designed), "{name}");
            assert_eq!(c.generator().len(), n - k + 1);
            assert!(c.generator()[0] && c.generator()[n - k]);
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("bch255".parse::<EccName>().unwrap(), EccName::Bch255);
        assert!(matches!("bch63".parse::<EccName>(), Err(Error::UnknownCode(_))));
    }

    #[test]
    fn zero_message_gives_zero_codeword() {
        for name in EccName::ALL {
            let c = name.code();
            let cw = c.encode(&Bits::zeros(c.k())).unwrap();
            assert_eq!(cw.bits().count_ones(), 0);
        }
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let c = EccName::Bch127.code();
        assert!(c.encode(&Bits::zeros(63)).is_err());
        assert_eq!(c.decode(&Bits::zeros(126)), Err(DecodeFailure::WrongLength));
    }

    #[test]
    fn codewords_are_systematic_with_zero_syndromes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in EccName::ALL {
            let c = name.code();
            for _ in 0..20 {
                let msg = random_bits(&mut rng, c.k());
                let cw = c.encode(&msg).unwrap();
                assert!(c.is_codeword(cw.bits()));
                assert_eq!(c.message_of(cw.bits()), msg);
            }
        }
    }

    #[test]
    fn xor_of_codewords_is_codeword_and_encode_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for name in EccName::ALL {
            let c = name.code();
            for _ in 0..20 {
                let a = random_bits(&mut rng, c.k());
                let b = random_bits(&mut rng, c.k());
                let ca = c.encode(&a).unwrap().into_bits();
                let cb = c.encode(&b).unwrap().into_bits();
                let sum = &ca ^ &cb;
                assert!(c.is_codeword(&sum));
                assert_eq!(c.encode(&(&a ^ &b)).unwrap().into_bits(), sum);
            }
        }
    }

    #[test]
    fn sampled_pairs_respect_minimum_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in EccName::ALL {
            let c = name.code();
            for _ in 0..1000 {
                let a = c.encode(&random_bits(&mut rng, c.k())).unwrap().into_bits();
                let b = c.encode(&random_bits(&mut rng, c.k())).unwrap().into_bits();
                let d = a.hamming(&b).unwrap();
                assert!(d == 0 || d > 2 * c.designed_t(), "{name}: distance {d}");
            }
        }
    }

    #[test]
    fn exhaustive_weight_two_on_bch127() {
        let c = EccName::Bch127.code();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let msg = random_bits(&mut rng, c.k());
        let cw = c.encode(&msg).unwrap().into_bits();
        assert_eq!(c.decode(&cw).unwrap(), msg);
        for i in 0..c.n() {
            let mut r = cw.clone();
            r.flip(i);
            assert_eq!(c.decode(&r).unwrap(), msg);
            for j in i + 1..c.n() {
                let mut r2 = r.clone();
                r2.flip(j);
                assert_eq!(c.decode(&r2).unwrap(), msg, "errors at {i},{j}");
            }
        }
    }

    #[test]
    fn corrects_t_and_refuses_t_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for name in EccName::ALL {
            let c = name.code();
            for trial in 0..200 {
                let msg = random_bits(&mut rng, c.k());
                let cw = c.encode(&msg).unwrap().into_bits();
                let weight = if trial % 2 == 0 { c.t() } else { c.t() + 1 };
                let mut r = cw.clone();
                for pos in rand::seq::index::sample(&mut rng, c.n(), weight) {
                    r.flip(pos);
                }
                match c.decode(&r) {
                    Ok(m) if weight <= c.t() => assert_eq!(m, msg),
                    Ok(m) => assert_ne!(m, msg, "{name}: t+1 errors decoded to original"),
                    Err(e) => assert!(weight > c.t(), "{name}: failed on {weight} errors: {e}"),
                }
            }
        }
    }
}
