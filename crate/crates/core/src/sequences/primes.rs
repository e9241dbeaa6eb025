//! Sieve of Eratosthenes and primes in the residue class `1 mod q`.

use crate::error::{Error, Result};

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    // composite[i] for odd i = 2 * idx + 1
    let mut composite = vec![false; n / 2 + 1];
    let mut i = 3usize;
    while i * i <= n {
        if !composite[i / 2] {
            let mut j = i * i;
            while j <= n {
                composite[j / 2] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    let mut out = vec![2];
    out.extend((1..=n / 2).filter(|&k| !composite[k] && 2 * k < n).map(|k| (2 * k + 1) as u64));
    out
}

/// Primes `p <= limit` with `p ≡ 1 (mod q)`; `q = 1` gives every prime.
pub fn primes_in_class(q: u64, limit: u64) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::InvalidParameter("modulus q must be at least 1".into()));
    }
    Ok(primes_up_to(limit).into_iter().filter(|p| q == 1 || p % q == 1).collect())
}

/// The first `count` primes in the class `1 mod q` (all primes for `q = 1`).
pub fn first_primes_in_class(q: u64, count: usize) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::InvalidParameter("modulus q must be at least 1".into()));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut limit = 64u64.max((count as u64) * 16 * q);
    loop {
        let ps = primes_in_class(q, limit)?;
        if ps.len() >= count {
            return Ok(ps[..count].to_vec());
        }
        limit = limit
            .checked_mul(2)
            .ok_or_else(|| Error::SizeLimit(format!("{count} primes in class 1 mod {q}")))?;
    }
}

/// Prime powers `p^j <= limit` (`j >= 1`), ascending.
pub fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for p in primes_up_to(limit) {
        let mut pk = p;
        loop {
            out.push(pk);
            match pk.checked_mul(p) {
                Some(next) if next <= limit => pk = next,
                _ => break,
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // trial-division oracle
    fn is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn class_examples() {
        assert_eq!(primes_in_class(1, 10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(primes_in_class(4, 30).unwrap(), vec![5, 13, 17, 29]);
        let oracle: Vec<u64> = (2..=50).filter(|&n| is_prime(n) && n % 6 == 1).collect();
        assert_eq!(oracle, vec![7, 13, 19, 31, 37, 43]);
        assert_eq!(primes_in_class(6, 50).unwrap(), oracle);
        assert!(primes_in_class(0, 10).is_err());
    }

    #[test]
    fn sieve_matches_trial_division() {
        let sieve = primes_up_to(5000);
        let oracle: Vec<u64> = (0..=5000).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieve, oracle);
        assert!(primes_up_to(1).is_empty());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(3), vec![2, 3]);
    }

    #[test]
    fn first_primes() {
        assert_eq!(first_primes_in_class(1, 4).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(first_primes_in_class(10, 3).unwrap(), vec![11, 31, 41]);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_powers_up_to(16), vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16]);
    }
}
