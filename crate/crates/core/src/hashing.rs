//! Signed feature hashing shared by the sentiment classifier and the text
//! embedder. FNV-1a is used so bucket assignment is stable across platforms
//! and toolchains.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Bucket index in `[0, dim)` and a ±1 sign for `token`.
pub fn signed_bucket(token: &str, dim: usize) -> (usize, f64) {
    let h = fnv1a(token.as_bytes());
    // low bits pick the bucket, the top bit picks the sign
    let idx = (h % dim as u64) as usize;
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    (idx, sign)
}

/// Sparse signed term-frequency vector, L2-normalised. Empty input gives an
/// empty vector. Entries are sorted by index with duplicates merged.
pub fn hashed_tf<'a>(tokens: impl IntoIterator<Item = &'a str>, dim: usize) -> Vec<(usize, f64)> {
    let mut entries: Vec<(usize, f64)> = tokens.into_iter().map(|t| signed_bucket(t, dim)).collect();
    entries.sort_by_key(|e| e.0);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (i, v) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => merged.push((i, v)),
        }
    }
    merged.retain(|e| e.1 != 0.0);
    let norm = merged.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in &mut merged {
            e.1 /= norm;
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn tf_is_unit_norm() {
        let v = hashed_tf(["buy", "the", "dip", "buy"], 1 << 18);
        let n: f64 = v.iter().map(|e| e.1 * e.1).sum();
        assert!((n - 1.0).abs() < 1e-12);
        assert!(hashed_tf(std::iter::empty(), 16).is_empty());
    }
}
