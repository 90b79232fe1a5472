use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};

/// Color tally of a configuration: `counts[r]` sites carry color `r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColorCounts {
    counts: Vec<u32>,
}

impl ColorCounts {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(PottsError::InvalidParameter(
                "color counts need at least one color".into(),
            ));
        }
        Ok(ColorCounts { counts })
    }

    /// Tally of a color vector with colors in `0..q`.
    pub fn from_colors(colors: &[u16], q: usize) -> Result<Self> {
        let mut counts = vec![0u32; q];
        for &c in colors {
            let c = c as usize;
            if c >= q {
                return Err(PottsError::InvalidParameter(format!(
                    "color {c} outside 0..{q}"
                )));
            }
            counts[c] += 1;
        }
        Ok(ColorCounts { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn q(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// The magnetization vector `n / N`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Compositions of `n` into `q` nonnegative parts in colexicographic order of
/// `(n_1, …, n_{q-1})`: the first coordinate runs fastest and `n_q` absorbs the remainder.
#[derive(Debug, Clone)]
pub struct Compositions {
    n: u32,
    head: Vec<u32>,
    head_sum: u32,
    done: bool,
}

impl Compositions {
    pub fn new(n: u32, q: usize) -> Self {
        assert!(q >= 1, "need at least one part");
        Compositions {
            n,
            head: vec![0; q - 1],
            head_sum: 0,
            done: false,
        }
    }

    /// Writes the current composition into `out` and advances; returns false when exhausted.
    pub fn next_into(&mut self, out: &mut [u32]) -> bool {
        if self.done {
            return false;
        }
        let k = self.head.len();
        out[..k].copy_from_slice(&self.head);
        out[k] = self.n - self.head_sum;
        self.advance();
        true
    }

    fn advance(&mut self) {
        for i in 0..self.head.len() {
            if self.head_sum < self.n {
                self.head[i] += 1;
                self.head_sum += 1;
                return;
            }
            self.head_sum -= self.head[i];
            self.head[i] = 0;
        }
        self.done = true;
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let mut out = vec![0; self.head.len() + 1];
        if self.next_into(&mut out) {
            Some(out)
        } else {
            None
        }
    }
}

/// Sort key realizing the colexicographic atom order.
pub(crate) fn colex_key(counts: &[u32]) -> Vec<u32> {
    counts[..counts.len() - 1].iter().rev().cloned().collect()
}
