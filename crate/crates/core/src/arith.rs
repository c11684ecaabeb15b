//! Number-theoretic helpers: sampling, inverses, Miller-Rabin and safe-prime search.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};

/// Miller-Rabin rounds used when accepting a prime.
pub const MR_ROUNDS: usize = 32;

const SIEVE_LIMIT: u32 = 1 << 13;
const SIEVE_WINDOW: u64 = 1 << 12;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = SIEVE_LIMIT as usize;
        let mut composite = vec![false; limit];
        let mut out = Vec::new();
        for i in 2..limit {
            if !composite[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j < limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

/// Uniform sample from `[0, bound)`.
pub fn random_below<R: RngCore + CryptoRng>(bound: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_below(bound)
}

/// Uniform sample from `[1, bound)`.
pub fn random_nonzero_below<R: RngCore + CryptoRng>(bound: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_range(&BigUint::one(), bound)
}

/// Uniform sample from `[1, 2^bits]`.
pub fn random_upto_pow2<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> BigUint {
    rng.gen_biguint(bits) + 1u32
}

/// Uniform unit of `Z_n`, resampling up to `max_attempts` times.
pub fn random_unit<R: RngCore + CryptoRng>(
    n: &BigUint,
    max_attempts: u64,
    rng: &mut R,
) -> Result<BigUint> {
    for _ in 0..max_attempts {
        let x = random_nonzero_below(n, rng);
        if x.gcd(n).is_one() {
            return Ok(x);
        }
    }
    Err(Error::AttemptsExhausted {
        what: "sampling a unit",
        attempts: max_attempts,
    })
}

/// `a^{-1} mod m`, or `None` when `gcd(a, m) != 1`.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_one() {
        return Some(BigUint::zero());
    }
    a.modinv(m)
}

pub fn is_unit(a: &BigUint, n: &BigUint) -> bool {
    !a.is_zero() && a.gcd(n).is_one()
}

/// Miller-Rabin with `rounds` random bases.
pub fn is_probable_prime<R: RngCore + CryptoRng>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
        for &p in small_primes().iter().take(64) {
            let p = p as u64;
            if small == p {
                return true;
            }
            if small % p == 0 {
                return false;
            }
        }
    } else if n.is_even() {
        return false;
    }

    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let two = BigUint::from(2u32);

    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Fermat test to base 2: cheap pre-filter before full Miller-Rabin.
fn passes_fermat2(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    two.modpow(&(n - 1u32), n).is_one()
}

/// True iff `p` and `(p-1)/2` are both (probable) primes.
pub fn is_safe_prime<R: RngCore + CryptoRng>(p: &BigUint, rng: &mut R) -> bool {
    if p < &BigUint::from(5u32) || p.is_even() {
        return false;
    }
    let half: BigUint = p >> 1u32;
    is_probable_prime(&half, MR_ROUNDS, rng) && is_probable_prime(p, MR_ROUNDS, rng)
}

/// Searches for a safe prime `p = 2p' + 1` of exactly `bits` bits.
///
/// Candidates for `p'` are walked in windows from a random odd start; a
/// small-prime sieve rejects any `p'` where `p'` or `2p' + 1` has a small
/// factor before Miller-Rabin runs. `max_candidates` bounds the total number
/// of `p'` values examined.
pub fn gen_safe_prime<R: RngCore + CryptoRng>(
    bits: u64,
    max_candidates: u64,
    rng: &mut R,
) -> Result<BigUint> {
    if bits < 3 {
        return Err(Error::InvalidParameters(format!(
            "no safe primes of {bits} bits"
        )));
    }
    let half_bits = bits - 1;
    let top = BigUint::one() << (half_bits - 1);
    let limit = BigUint::one() << half_bits;
    // Above 32 bits, fixing the second bit as well guarantees that the
    // product of two such primes has exactly 2*bits bits.
    let floor = if bits >= 32 {
        &top + (BigUint::one() << (half_bits - 2))
    } else {
        top.clone()
    };
    let sieve: Vec<u32> = small_primes()
        .iter()
        .copied()
        .skip(1)
        .filter(|&s| BigUint::from(s) < floor)
        .collect();

    let mut examined = 0u64;
    while examined < max_candidates {
        let mut start = rng.gen_biguint(half_bits) | &floor;
        start |= BigUint::one();
        let residues: Vec<u32> = sieve
            .iter()
            .map(|&s| (&start % s).to_u32().unwrap_or(0))
            .collect();

        for k in 0..SIEVE_WINDOW {
            if examined >= max_candidates {
                break;
            }
            examined += 1;
            let step = 2 * k;
            let rejected = sieve.iter().zip(&residues).any(|(&s, &r)| {
                let s = s as u64;
                let res = (r as u64 + step) % s;
                res == 0 || res == (s - 1) / 2
            });
            if rejected {
                continue;
            }
            let half = &start + step;
            if half >= limit {
                break;
            }
            if !passes_fermat2(&half) {
                continue;
            }
            let p: BigUint = (&half << 1u32) + 1u32;
            if !passes_fermat2(&p) {
                continue;
            }
            if is_probable_prime(&half, MR_ROUNDS, rng) && is_probable_prime(&p, MR_ROUNDS, rng) {
                return Ok(p);
            }
        }
    }
    Err(Error::AttemptsExhausted {
        what: "safe prime search",
        attempts: max_candidates,
    })
}

/// `L(u) = (u - 1) / N`, defined only when `u ≡ 1 (mod N)`.
pub fn l_function(u: &BigUint, n: &BigUint) -> Option<BigUint> {
    if u.is_zero() {
        return None;
    }
    let (q, r) = (u - 1u32).div_rem(n);
    r.is_zero().then_some(q)
}
