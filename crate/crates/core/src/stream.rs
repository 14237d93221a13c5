//! Lazily extended infinite words.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ergodic::{sample_rng, BernoulliMeasure};
use crate::ifs::Word;

/// How the symbols of a stream are produced.
#[derive(Clone, Debug, Serialize)]
pub enum StreamPolicy {
    /// Independent blocks drawn from a Bernoulli measure.
    Random { measure: BernoulliMeasure, seed: u64 },
    /// `w w w ⋯`.
    Periodic(Word),
    /// All words of length 1, then of length 2, and so on, concatenated in
    /// lexicographic order. Every finite word occurs as a subword.
    BreadthFirst { alphabet: usize },
}

#[derive(Clone, Debug)]
pub struct WordStream {
    policy: StreamPolicy,
    symbols: Vec<usize>,
    rng: Option<ChaCha8Rng>,
    // breadth-first position: current length and index within it
    bf_len: usize,
    bf_index: u128,
}

impl WordStream {
    pub fn new(policy: StreamPolicy) -> Self {
        let rng = match &policy {
            StreamPolicy::Random { seed, .. } => Some(sample_rng(*seed, 0)),
            _ => None,
        };
        if let StreamPolicy::Periodic(w) = &policy {
            assert!(!w.is_empty(), "periodic stream needs a nonempty word");
        }
        Self { policy, symbols: Vec::new(), rng, bf_len: 1, bf_index: 0 }
    }

    pub fn random(measure: BernoulliMeasure, seed: u64) -> Self {
        Self::new(StreamPolicy::Random { measure, seed })
    }

    pub fn periodic(word: Word) -> Self {
        Self::new(StreamPolicy::Periodic(word))
    }

    pub fn breadth_first(alphabet: usize) -> Self {
        Self::new(StreamPolicy::BreadthFirst { alphabet })
    }

    pub fn policy(&self) -> &StreamPolicy {
        &self.policy
    }

    /// First `n` symbols, generating more as needed.
    pub fn prefix(&mut self, n: usize) -> &[usize] {
        while self.symbols.len() < n {
            self.extend();
        }
        &self.symbols[..n]
    }

    pub fn symbol(&mut self, k: usize) -> usize {
        self.prefix(k + 1)[k]
    }

    /// Symbols generated so far.
    pub fn generated(&self) -> &[usize] {
        &self.symbols
    }

    fn extend(&mut self) {
        match &self.policy {
            StreamPolicy::Random { measure, .. } => {
                let rng = self.rng.as_mut().expect("random stream has a generator");
                measure.draw_block(rng, &mut self.symbols);
            }
            StreamPolicy::Periodic(w) => self.symbols.extend_from_slice(w.symbols()),
            StreamPolicy::BreadthFirst { alphabet } => {
                let a = *alphabet as u128;
                let len = self.bf_len;
                let mut digits = vec![0usize; len];
                let mut r = self.bf_index;
                for k in (0..len).rev() {
                    digits[k] = (r % a) as usize;
                    r /= a;
                }
                self.symbols.extend_from_slice(&digits);
                self.bf_index += 1;
                if self.bf_index == a.pow(len as u32) {
                    self.bf_len += 1;
                    self.bf_index = 0;
                }
            }
        }
    }
}
