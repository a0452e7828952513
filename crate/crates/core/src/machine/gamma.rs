//! Elias gamma code, shifted by one so that zero is representable.
//!
//! `v` is written as the gamma code of `v + 1`: `⌊log₂(v+1)⌋` zeros followed
//! by the binary digits of `v + 1`, most significant (always `1`) first.

use crate::bits::BitString;

/// Longest zero run accepted by the decoder; bounds decoded values below 2^62.
pub const MAX_ZERO_RUN: usize = 61;

pub fn gamma_len(v: u64) -> usize {
    let n = v + 1;
    2 * (63 - n.leading_zeros() as usize) + 1
}

pub fn write_gamma(out: &mut BitString, v: u64) {
    let n = v + 1;
    let width = 64 - n.leading_zeros() as usize;
    for _ in 0..width - 1 {
        out.push(false);
    }
    for i in (0..width).rev() {
        out.push((n >> i) & 1 == 1);
    }
}

pub fn gamma(v: u64) -> BitString {
    let mut out = BitString::with_capacity(gamma_len(v));
    write_gamma(&mut out, v);
    out
}

/// All values whose gamma code is exactly `len` bits long.
pub fn values_with_gamma_len(len: usize) -> std::ops::RangeInclusive<u64> {
    if len.is_multiple_of(2) || len / 2 > MAX_ZERO_RUN {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    let k = (len - 1) / 2;
    ((1u64 << k) - 1)..=((1u64 << (k + 1)) - 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    #[test]
    fn small_codes() {
        assert_eq!(gamma(0), bits("1"));
        assert_eq!(gamma(1), bits("010"));
        assert_eq!(gamma(2), bits("011"));
        assert_eq!(gamma(3), bits("00100"));
        assert_eq!(gamma(6), bits("00111"));
        assert_eq!(gamma(7), bits("0001000"));
    }

    #[test]
    fn lengths_agree() {
        for v in 0..5000 {
            assert_eq!(gamma(v).len(), gamma_len(v), "v = {v}");
            assert!(values_with_gamma_len(gamma_len(v)).contains(&v));
        }
        assert!(values_with_gamma_len(4).is_empty());
        assert_eq!(values_with_gamma_len(3), 1..=2);
    }

    #[test]
    fn gamma_codes_are_prefix_free() {
        let codes: Vec<BitString> = (0..600).map(gamma).collect();
        assert!(crate::bits::is_prefix_free(&codes));
    }
}
