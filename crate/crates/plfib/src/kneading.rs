//! Kneading maps and cutting times.
//!
//! The combinatorics of the whole construction are carried by the kneading
//! map `Q` and the cutting times `S`, related by `S_k = S_{k-1} + S_{Q(k)}`
//! with `S_0 = 1`. Cutting times grow like the golden ratio and leave the
//! 64-bit range near index 86, so they are kept as big integers with cached
//! f64 views.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

/// Kneading map values `Q(k)`, cutting times `S_k`, and the truncation depth.
#[derive(Debug, Clone, PartialEq)]
pub struct KneadingData {
    /// `q[k]` is Q(k) for 1 <= k <= K; `q[0]` is unused and set to 0.
    q: Vec<usize>,
    /// `s[k]` is S_k for 0 <= k <= K.
    s: Vec<BigUint>,
    /// f64 views of the cutting times (exact up to index ~86, rounded beyond).
    s_f64: Vec<f64>,
    k_depth: usize,
}

impl KneadingData {
    /// Build from kneading values `q[1..=k_depth]`, running the cutting-time
    /// recursion. Requires `Q(k) < k` so the recursion is well founded.
    pub fn from_q(q_values: &[usize]) -> Result<KneadingData> {
        let k_depth = q_values.len();
        let mut q = Vec::with_capacity(k_depth + 1);
        q.push(0);
        q.extend_from_slice(q_values);
        let mut s: Vec<BigUint> = vec![BigUint::from(1u32)];
        for k in 1..=k_depth {
            if q[k] >= k {
                return Err(Error::InvalidParameter {
                    name: "Q(k)",
                    value: q[k] as f64,
                    range: "Q(k) < k",
                });
            }
            let next = &s[k - 1] + &s[q[k]];
            s.push(next);
        }
        let s_f64 = s.iter().map(biguint_to_f64).collect();
        Ok(KneadingData {
            q,
            s,
            s_f64,
            k_depth,
        })
    }

    pub fn depth(&self) -> usize {
        self.k_depth
    }

    /// Q(k) for 1 <= k <= depth.
    pub fn q(&self, k: usize) -> usize {
        self.q[k]
    }

    /// Q(Q(k)), with Q(0) read as 0.
    pub fn q2(&self, k: usize) -> usize {
        let qk = self.q[k];
        if qk == 0 {
            0
        } else {
            self.q[qk]
        }
    }

    /// Exact cutting time S_k.
    pub fn s_big(&self, k: usize) -> &BigUint {
        &self.s[k]
    }

    /// S_k as f64 (rounded once the exact value exceeds 2^53).
    pub fn s_f64(&self, k: usize) -> f64 {
        self.s_f64[k]
    }

    /// S_k as u64 when it fits.
    pub fn s_u64(&self, k: usize) -> Option<u64> {
        u64::try_from(&self.s[k]).ok()
    }

    /// Inducing time of branch j: tau_j = S_{j-1}.
    pub fn tau_f64(&self, j: usize) -> f64 {
        self.s_f64[j - 1]
    }

    pub fn q_values(&self) -> &[usize] {
        &self.q[1..]
    }
}

fn biguint_to_f64(v: &BigUint) -> f64 {
    // Sum limbs high to low; exact while the value fits the mantissa,
    // correctly rounded to ~1 ulp beyond.
    let digits = v.to_u64_digits();
    let mut acc = 0.0f64;
    for d in digits.iter().rev() {
        acc = acc * 1.8446744073709552e19 + *d as f64;
    }
    acc
}

impl Serialize for KneadingData {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("KneadingData", 3)?;
        st.serialize_field("Q", &self.q[1..])?;
        // Cutting times as decimal strings: exact at every depth.
        let s_str: Vec<String> = self.s.iter().map(|v| v.to_string()).collect();
        st.serialize_field("S", &s_str)?;
        st.serialize_field("K", &self.k_depth)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct KneadingWire {
    #[serde(rename = "Q")]
    q: Vec<usize>,
    #[serde(rename = "K")]
    k: usize,
}

impl<'de> Deserialize<'de> for KneadingData {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire = KneadingWire::deserialize(deserializer)?;
        if wire.q.len() != wire.k {
            return Err(serde::de::Error::custom("Q length does not match K"));
        }
        KneadingData::from_q(&wire.q).map_err(serde::de::Error::custom)
    }
}

/// Fibonacci kneading map: Q(k) = max(k-2, 0); the cutting times are the
/// Fibonacci numbers 1, 2, 3, 5, 8, ...
pub fn fibonacci_kneading(k_depth: usize) -> KneadingData {
    let q: Vec<usize> = (1..=k_depth).map(|k| k.saturating_sub(2)).collect();
    KneadingData::from_q(&q).expect("Fibonacci kneading is always well founded")
}

/// Kneading map Q(k) = floor(r k) beyond a Fibonacci-type prefix.
///
/// The prefix keeps the first values at max(k-2, 0) so the recursion and the
/// branch-linearity condition hold for small k, where the floor rule is not
/// yet meaningful.
pub fn floor_r_kneading(r: f64, k_depth: usize, prefix: usize) -> Result<KneadingData> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            range: "(0, 1)",
        });
    }
    let q: Vec<usize> = (1..=k_depth)
        .map(|k| {
            if k <= prefix {
                k.saturating_sub(2)
            } else {
                // floor(r k) compared against the prefix rule so Q never
                // drops back below its small-k values.
                (r * k as f64).floor() as usize
            }
        })
        .collect();
    KneadingData::from_q(&q)
}

/// Default Fibonacci-type prefix length for [`floor_r_kneading`].
pub const DEFAULT_FLOOR_R_PREFIX: usize = 2;

/// Result of scanning condition (Q(k+1) > Q(Q^2(k)+1)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Condition121Report {
    pub holds: bool,
    pub first_failing_k: Option<usize>,
    pub checked_up_to: usize,
}

/// Scan the strict inequality Q(k+1) > Q(Q^2(k)+1) over 2 <= k <= K-1,
/// skipping k for which Q^2(k)+1 exceeds the available depth.
pub fn check_condition_121(kd: &KneadingData) -> Result<Condition121Report> {
    let k_depth = kd.depth();
    if k_depth < 3 {
        return Err(Error::IndexOutOfRange {
            index: 3,
            depth: k_depth,
        });
    }
    let mut checked = 0;
    for k in 2..k_depth {
        let idx = kd.q2(k) + 1;
        if idx > k_depth {
            continue;
        }
        checked = k;
        if kd.q(k + 1) <= kd.q(idx) {
            return Ok(Condition121Report {
                holds: false,
                first_failing_k: Some(k),
                checked_up_to: checked,
            });
        }
    }
    Ok(Condition121Report {
        holds: true,
        first_failing_k: None,
        checked_up_to: checked,
    })
}

/// Result of the lexicographic admissibility scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub holds: bool,
    pub first_failing_k: Option<usize>,
    /// The comparison is necessarily truncated at the available depth; ties
    /// up to that depth are accepted and flagged here.
    pub verified_to_depth: usize,
}

/// Check {Q(k+j)}_{j>=1} >= {Q(Q^2(k)+j)}_{j>=1} lexicographically for all
/// k >= 1, comparing as deep as the data allows.
pub fn check_admissibility(kd: &KneadingData) -> AdmissibilityReport {
    let k_depth = kd.depth();
    for k in 1..k_depth {
        let base = kd.q2(k);
        for j in 1.. {
            let (a, b) = (k + j, base + j);
            if a > k_depth || b > k_depth {
                break; // tie to available depth: accepted, qualified verdict
            }
            match kd.q(a).cmp(&kd.q(b)) {
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => continue,
                std::cmp::Ordering::Less => {
                    return AdmissibilityReport {
                        holds: false,
                        first_failing_k: Some(k),
                        verified_to_depth: k_depth,
                    }
                }
            }
        }
    }
    AdmissibilityReport {
        holds: true,
        first_failing_k: None,
        verified_to_depth: k_depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_cutting_times_start() {
        let kd = fibonacci_kneading(5);
        let s: Vec<u64> = (0..=5).map(|k| kd.s_u64(k).unwrap()).collect();
        assert_eq!(s, vec![1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn depth_one() {
        let kd = fibonacci_kneading(1);
        assert_eq!(kd.s_u64(1), Some(2));
    }

    #[test]
    fn fibonacci_ratio_limit() {
        let kd = fibonacci_kneading(20);
        let ratio = kd.s_f64(20) / kd.s_f64(19);
        assert!((ratio - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-4);
    }

    #[test]
    fn recursion_is_exact_at_any_depth() {
        let kd = fibonacci_kneading(120);
        for k in 1..=120 {
            assert_eq!(
                kd.s_big(k) - kd.s_big(k - 1),
                kd.s_big(kd.q(k)).clone(),
                "S_k - S_(k-1) = S_Q(k) fails at {k}"
            );
        }
        // beyond u64: still exact big integers
        assert!(kd.s_u64(120).is_none());
        assert_eq!(
            kd.s_big(120).to_string(),
            (kd.s_big(119) + kd.s_big(118)).to_string()
        );
    }

    #[test]
    fn first_fibonacci_numbers_exact_to_80() {
        let kd = fibonacci_kneading(80);
        let (mut a, mut b) = (1u128, 2u128);
        for k in 1..=80 {
            assert_eq!(u128::try_from(kd.s_big(k)).unwrap(), b);
            let c = a + b;
            a = b;
            b = c;
        }
    }

    #[test]
    fn floor_r_values() {
        let kd = floor_r_kneading(0.5, 12, DEFAULT_FLOOR_R_PREFIX).unwrap();
        assert_eq!(kd.q(10), 5);
        let kd9 = floor_r_kneading(0.9, 12, DEFAULT_FLOOR_R_PREFIX).unwrap();
        assert_eq!(kd9.q(10), 9); // 9 < 10: accepted
    }

    #[test]
    fn floor_r_rejects_bad_r() {
        assert!(floor_r_kneading(1.2, 10, 2).is_err());
        assert!(floor_r_kneading(0.0, 10, 2).is_err());
    }

    #[test]
    fn floor_r_s_strictly_increasing() {
        let kd = floor_r_kneading(0.5, 20, DEFAULT_FLOOR_R_PREFIX).unwrap();
        for k in 1..=20 {
            assert!(kd.s_big(k) > kd.s_big(k - 1));
        }
    }

    #[test]
    fn condition_121_fibonacci() {
        let kd = fibonacci_kneading(30);
        let rep = check_condition_121(&kd).unwrap();
        assert!(rep.holds, "first failing k: {:?}", rep.first_failing_k);
    }

    #[test]
    fn condition_121_rejects_constant_zero() {
        // Q = 0 everywhere: Q(k+1) = 0 is never > Q(Q^2(k)+1) = 0.
        let kd = KneadingData::from_q(&[0; 10]).unwrap();
        let rep = check_condition_121(&kd).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.first_failing_k, Some(2));
    }

    #[test]
    fn condition_121_needs_strictness() {
        // Q(3) = 0 and Q(Q^2(2)+1) = Q(1) = 0: equality at k = 2 fails.
        let kd = KneadingData::from_q(&[0, 0, 0, 1, 2]).unwrap();
        let rep = check_condition_121(&kd).unwrap();
        assert_eq!(rep.first_failing_k, Some(2));
    }

    #[test]
    fn admissibility_fibonacci() {
        let kd = fibonacci_kneading(30);
        assert!(check_admissibility(&kd).holds);
    }

    #[test]
    fn admissibility_q_k_minus_1() {
        // Q(k) = k-1: the comparison sequences coincide, scan accepts.
        let q: Vec<usize> = (1..=15).map(|k| k - 1).collect();
        let kd = KneadingData::from_q(&q).unwrap();
        let rep = check_admissibility(&kd);
        assert!(rep.holds);
        assert_eq!(rep.verified_to_depth, 15);
    }

    #[test]
    fn condition_121_implies_admissibility_for_families() {
        for kd in [
            fibonacci_kneading(40),
            floor_r_kneading(0.5, 40, 2).unwrap(),
            floor_r_kneading(0.7, 40, 3).unwrap(),
        ] {
            if check_condition_121(&kd).unwrap().holds {
                assert!(check_admissibility(&kd).holds);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let kd = fibonacci_kneading(90);
        let js = serde_json::to_string(&kd).unwrap();
        let back: KneadingData = serde_json::from_str(&js).unwrap();
        assert_eq!(kd, back);
    }
}
