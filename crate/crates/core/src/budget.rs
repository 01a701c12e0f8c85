//! Resource limits shared by the counters and scanners.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable overriding [`Budget::max_bytes`].
pub const MEM_BUDGET_ENV: &str = "LATVIS_MEM_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Upper bound on the bytes any single table or bit array may occupy.
    pub max_bytes: u64,
    /// Maximum number of point-versus-S tests the brute-force oracle performs.
    pub max_point_tests: u64,
    /// Maximum number of CRT residue vectors enumerated for one |I_d|.
    pub max_residue_vectors: u64,
    /// Largest cube side or disc radius the certificate and scan drivers will
    /// go to on their own.
    pub max_scan: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_bytes: 2 << 30,
            max_point_tests: 100_000_000,
            max_residue_vectors: 10_000_000,
            max_scan: 100_000_000,
        }
    }
}

impl Budget {
    /// Default limits, with `max_bytes` taken from `LATVIS_MEM_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        let mut budget = Budget::default();
        if let Ok(raw) = std::env::var(MEM_BUDGET_ENV) {
            budget.max_bytes = parse_bytes(&raw)?;
        }
        Ok(budget)
    }

    pub fn check_bytes(&self, what: &'static str, bytes: u128) -> Result<()> {
        if bytes > self.max_bytes as u128 {
            return Err(Error::capacity(what, bytes, self.max_bytes as u128));
        }
        Ok(())
    }
}

/// Parses `123`, `64K`, `512M`, `2G` (binary multiples).
pub fn parse_bytes(raw: &str) -> Result<u64> {
    let s = raw.trim();
    let (digits, shift) = match s.chars().last() {
        Some('k' | 'K') => (&s[..s.len() - 1], 10),
        Some('m' | 'M') => (&s[..s.len() - 1], 20),
        Some('g' | 'G') => (&s[..s.len() - 1], 30),
        _ => (s, 0),
    };
    let base: u64 = digits
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad byte count {raw:?}")))?;
    base.checked_mul(1u64 << shift)
        .ok_or_else(|| Error::InvalidInput(format!("byte count {raw:?} overflows")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_suffixes() {
        assert_eq!(parse_bytes("4096").unwrap(), 4096);
        assert_eq!(parse_bytes("64K").unwrap(), 64 << 10);
        assert_eq!(parse_bytes("3m").unwrap(), 3 << 20);
        assert_eq!(parse_bytes(" 2G ").unwrap(), 2 << 30);
        assert!(parse_bytes("lots").is_err());
    }

    #[test]
    fn check_bytes_rejects_oversize() {
        let b = Budget {
            max_bytes: 100,
            ..Budget::default()
        };
        assert!(b.check_bytes("x", 100).is_ok());
        assert!(matches!(
            b.check_bytes("x", 101),
            Err(Error::Capacity { needed: 101, .. })
        ));
    }
}
