//! Distribution transformer between information bits and coin tosses.
//!
//! Encoding runs an arithmetic *decoder* on the input bits (the bits are
//! read as a binary fraction `x ∈ [0,1)`), so each toss follows its coin's
//! distribution. Decoding runs the matching arithmetic *encoder* on the
//! tosses. Both sides share integer interval arithmetic (62-bit state,
//! frequencies quantized to `2^FREQ_BITS`) with the classic "pending bit"
//! renormalization, so no carries occur.
//!
//! Flush convention: the encoder side emits only the bits fixed by the final
//! interval and nothing else. Those bits are a prefix of `x`, and that prefix is
//! what "consumed" means: `decode(encode(b))` returns exactly
//! `b[..bits_consumed]`.

use super::SampleArray;
use crate::grid::Symbol;

const STATE_BITS: u32 = 62;
const TOP: u64 = (1 << STATE_BITS) - 1;
const HALF: u64 = 1 << (STATE_BITS - 1);
const QUARTER: u64 = 1 << (STATE_BITS - 2);

/// Resolution of quantized coin probabilities.
pub const FREQ_BITS: u32 = 30;
const TOTAL: u64 = 1 << FREQ_BITS;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodeOutcome {
    pub array: SampleArray,
    /// Length of the input prefix carried by the array.
    pub bits_consumed: usize,
    /// The input ran out mid-array and zero bits were read as padding; the
    /// carried prefix is then a prefix of the zero-padded input.
    pub exhausted: bool,
}

/// Coin distribution with integer cumulative frequencies summing to `2^FREQ_BITS`.
/// Zero probabilities stay zero; positive ones get at least one count.
pub(crate) struct Quantized {
    cum: Vec<u64>,
}

impl Quantized {
    pub(crate) fn new(p: &[f64]) -> Quantized {
        let mut freq: Vec<u64> =
            p.iter().map(|&x| if x > 0.0 { ((x * TOTAL as f64).round() as u64).clamp(1, TOTAL) } else { 0 }).collect();
        let sum: u64 = freq.iter().sum();
        let big = (0..freq.len()).max_by_key(|&k| (freq[k], std::cmp::Reverse(k))).expect("nonempty alphabet");
        if sum > TOTAL {
            freq[big] -= sum - TOTAL;
        } else {
            freq[big] += TOTAL - sum;
        }
        let mut cum = Vec::with_capacity(freq.len() + 1);
        cum.push(0);
        for f in freq {
            cum.push(cum.last().unwrap() + f);
        }
        Quantized { cum }
    }

    pub(crate) fn freq(&self, w: Symbol) -> u64 {
        self.cum[w as usize + 1] - self.cum[w as usize]
    }

    fn narrow(&self, low: u64, high: u64, w: Symbol) -> (u64, u64) {
        let range = (high - low + 1) as u128;
        let lo = self.cum[w as usize] as u128;
        let hi = self.cum[w as usize + 1] as u128;
        let new_high = low + ((range * hi) / TOTAL as u128) as u64 - 1;
        let new_low = low + ((range * lo) / TOTAL as u128) as u64;
        (new_low, new_high)
    }
}

/// Symbols → bits.
pub(crate) struct Compressor {
    low: u64,
    high: u64,
    pending: usize,
    out: Vec<bool>,
}

impl Compressor {
    pub(crate) fn new() -> Self {
        Compressor { low: 0, high: TOP, pending: 0, out: Vec::new() }
    }

    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    pub(crate) fn push_symbol(&mut self, q: &Quantized, w: Symbol) {
        debug_assert!(q.freq(w) > 0);
        (self.low, self.high) = q.narrow(self.low, self.high, w);
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < HALF + QUARTER {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    /// Bits determined so far; pending (undecided) bits are dropped.
    pub(crate) fn finish(self) -> Vec<bool> {
        self.out
    }
}

/// Bits → symbols.
pub(crate) struct Expander<'a> {
    bits: &'a [bool],
    next: usize,
    low: u64,
    high: u64,
    value: u64,
}

impl<'a> Expander<'a> {
    pub(crate) fn new(bits: &'a [bool]) -> Self {
        let mut e = Expander { bits, next: 0, low: 0, high: TOP, value: 0 };
        for _ in 0..STATE_BITS {
            e.value = (e.value << 1) | e.read() as u64;
        }
        e
    }

    /// The input ran out and padding bits were read.
    pub(crate) fn read_past_end(&self) -> bool {
        self.next > self.bits.len()
    }

    fn read(&mut self) -> bool {
        let b = self.bits.get(self.next).copied().unwrap_or(false);
        self.next += 1;
        b
    }

    pub(crate) fn next_symbol(&mut self, q: &Quantized) -> Symbol {
        let range = (self.high - self.low + 1) as u128;
        let scaled = ((((self.value - self.low) as u128 + 1) * TOTAL as u128 - 1) / range) as u64;
        let w = (0..q.cum.len() - 1).find(|&k| q.cum[k + 1] > scaled).expect("scaled value below total") as Symbol;
        (self.low, self.high) = q.narrow(self.low, self.high, w);
        loop {
            if self.high < HALF {
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < HALF + QUARTER {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.read() as u64;
        }
        w
    }
}
