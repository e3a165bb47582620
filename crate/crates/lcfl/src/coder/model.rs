//! Adaptive frequency model over a small symbol alphabet.

use crate::error::{Error, Result};

use super::range::{RangeDecoder, RangeEncoder};

const INCREMENT: u32 = 32;
const HALVE_AT: u32 = 1 << 15;

/// Frequency counts start at one per symbol (so probabilities stay strictly
/// positive), grow by a fixed increment on every coded symbol, and are
/// halved (floored at one) when the total reaches 2^15. Encoder and decoder
/// perform identical updates, keeping the two sides in lockstep.
#[derive(Debug, Clone)]
pub struct SymbolModel {
    counts: Vec<u32>,
    total: u32,
}

impl SymbolModel {
    pub fn new(alphabet: usize) -> Self {
        assert!((2..=1 << 12).contains(&alphabet));
        SymbolModel {
            counts: vec![1; alphabet],
            total: alphabet as u32,
        }
    }

    /// Two-symbol model for adaptive flags.
    pub fn binary() -> Self {
        SymbolModel::new(2)
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    fn span(&self, symbol: usize) -> (u32, u32) {
        let start: u32 = self.counts[..symbol].iter().sum();
        (start, self.counts[symbol])
    }

    fn bump(&mut self, symbol: usize) {
        self.counts[symbol] += INCREMENT;
        self.total += INCREMENT;
        if self.total >= HALVE_AT {
            self.total = 0;
            for c in &mut self.counts {
                *c = (*c + 1) >> 1;
                self.total += *c;
            }
        }
    }

    pub fn encode(&mut self, enc: &mut RangeEncoder, symbol: usize) -> Result<()> {
        if symbol >= self.counts.len() {
            return Err(Error::argument(format!(
                "symbol {symbol} outside alphabet of {}",
                self.counts.len()
            )));
        }
        let (start, size) = self.span(symbol);
        enc.encode(start, size, self.total);
        self.bump(symbol);
        Ok(())
    }

    pub fn encode_bit(&mut self, enc: &mut RangeEncoder, bit: bool) -> Result<()> {
        self.encode(enc, usize::from(bit))
    }

    pub fn decode(&mut self, dec: &mut RangeDecoder) -> Result<usize> {
        let dv = dec.decode_value(self.total)?;
        let mut start = 0u32;
        let mut symbol = None;
        for (i, &c) in self.counts.iter().enumerate() {
            if dv < start + c {
                symbol = Some((i, start, c));
                break;
            }
            start += c;
        }
        let (symbol, start, size) =
            symbol.ok_or_else(|| Error::decode(dec.position(), "symbol value out of range"))?;
        dec.update(start, size, self.total);
        self.bump(symbol);
        Ok(symbol)
    }

    pub fn decode_bit(&mut self, dec: &mut RangeDecoder) -> Result<bool> {
        Ok(self.decode(dec)? == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn model_round_trip() {
        let mut rng = StdRng::seed_from_u64(81);
        let symbols: Vec<usize> = (0..20_000).map(|_| rng.random_range(0..5)).collect();
        let mut enc = RangeEncoder::new();
        let mut model = SymbolModel::new(5);
        for &s in &symbols {
            model.encode(&mut enc, s).unwrap();
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes).unwrap();
        let mut model = SymbolModel::new(5);
        for &s in &symbols {
            assert_eq!(model.decode(&mut dec).unwrap(), s);
        }
    }

    #[test]
    fn out_of_alphabet_symbol_errors() {
        let mut enc = RangeEncoder::new();
        let mut model = SymbolModel::new(4);
        assert!(model.encode(&mut enc, 4).is_err());
    }

    #[test]
    fn counts_stay_positive_through_halving() {
        let mut enc = RangeEncoder::new();
        let mut model = SymbolModel::new(8);
        // Hammer a single symbol through many halvings.
        for _ in 0..100_000 {
            model.encode(&mut enc, 3).unwrap();
        }
        assert!(model.counts.iter().all(|&c| c >= 1));
        assert!(model.total < HALVE_AT + INCREMENT);
    }

    #[test]
    fn skewed_source_codes_near_entropy() {
        // Stationary source with p = [0.8, 0.1, 0.05, 0.05]:
        // H = 1.0219 bits/symbol.
        let probs = [0.8f64, 0.1, 0.05, 0.05];
        let entropy: f64 = -probs.iter().map(|p| p * p.log2()).sum::<f64>();
        let mut rng = StdRng::seed_from_u64(82);
        let n = 100_000usize;
        let symbols: Vec<usize> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(0.0..1.0);
                let mut acc = 0.0;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if x < acc {
                        return i;
                    }
                }
                probs.len() - 1
            })
            .collect();
        let mut enc = RangeEncoder::new();
        let mut model = SymbolModel::new(4);
        for &s in &symbols {
            model.encode(&mut enc, s).unwrap();
        }
        let bits = enc.finish().len() as f64 * 8.0;
        let ideal = entropy * n as f64;
        let ratio = bits / ideal;
        assert!(
            ratio < 1.02 && ratio > 0.98,
            "coded {bits} bits vs ideal {ideal} (ratio {ratio})"
        );
    }
}
